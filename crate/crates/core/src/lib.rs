pub mod ball;
pub mod bessel;
pub mod certificate;
pub mod certify;
pub mod error;
pub mod quadrature;
pub mod remainders;
pub mod series;
pub mod symbolic;
pub mod table;

pub use ball::{Ball, DEFAULT_PRECISION};
pub use certificate::{Certificate, Verdict};
pub use error::{Error, Result};
pub use series::{NatSeries, SeriesKind};
