//! Exact symbolic expansions in n^{-1/2}.

pub mod constant;
pub mod derivation;
pub mod layers;
pub mod truncated;

pub use constant::AlgebraicConstant;
pub use derivation::{corollary_coefficients, derive_constants, prefactor_expansions, Constants};
pub use layers::{build_integrand_layers, gaussian_moment, integrate_layers, PolynomialLayer};
pub use truncated::{RemainderBound, SeriesVar, TruncatedAsymptoticSeries};
