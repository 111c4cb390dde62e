//! Expansion of the saddle-point integrand in powers of 1/lambda_n, and its
//! termwise Gaussian integration.
//!
//! After the change of variables x -> x/lambda the integrand (without the
//! Gaussian weight) is the product of three factors, written with L = 1/lambda:
//!
//! * the even part of cot(pi/2 (x L/sqrt6 + 1/2)),
//! * sqrt(1 - x^2 L^2) - L^2 / 2,
//! * the degree-4 Taylor polynomial of e^y, with
//!   y = 2 sum_{m=2}^{11} binom(1/2, m) (-1)^m x^{2m} L^{2m-2}.

use std::collections::BTreeMap;

use rug::{Integer, Rational};

use super::constant::AlgebraicConstant;
use super::truncated::{binomial_coefficient, RationalSeries, SeriesVar, TruncatedAsymptoticSeries};
use crate::error::{Error, Result};

/// Number of even Taylor terms kept for the cot and sqrt factors.
pub const EVEN_TERMS: usize = 5;
/// Highest index in the sum defining y.
pub const Y_TERMS: u32 = 11;
/// Degree of the Taylor polynomial used for e^y.
pub const EXP_DEGREE: u32 = 4;
/// Layers with L-power at or above this value form the remainder E_n.
pub const REMAINDER_LAYER: u32 = 10;

/// Polynomial in x and L with exact coefficients, keyed by (x power, L power).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BiPoly(BTreeMap<(u32, u32), AlgebraicConstant>);

impl BiPoly {
    pub fn one() -> Self {
        let mut m = BTreeMap::new();
        m.insert((0, 0), AlgebraicConstant::one());
        BiPoly(m)
    }

    pub fn add_term(&mut self, x_pow: u32, l_pow: u32, c: AlgebraicConstant) {
        let entry = self.0.entry((x_pow, l_pow)).or_default();
        *entry = &*entry + &c;
        if entry.is_zero() {
            self.0.remove(&(x_pow, l_pow));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &AlgebraicConstant)> {
        self.0.iter()
    }

    pub fn coeff(&self, x_pow: u32, l_pow: u32) -> AlgebraicConstant {
        self.0.get(&(x_pow, l_pow)).cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(i, j), c) in &other.0 {
            out.add_term(i, j, c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = BiPoly::default();
        for (&(i1, j1), a) in &self.0 {
            for (&(i2, j2), b) in &other.0 {
                out.add_term(i1 + i2, j1 + j2, a * b);
            }
        }
        out
    }

    pub fn scale(&self, c: &AlgebraicConstant) -> Self {
        let mut out = BiPoly::default();
        for (&(i, j), a) in &self.0 {
            out.add_term(i, j, a * c);
        }
        out
    }
}

/// Coefficients of u^k in cot(pi/4 + u).
pub fn cot_quarter_series(order: usize) -> RationalSeries {
    let (s, c) = (RationalSeries::sin(order), RationalSeries::cos(order));
    c.sub(&s).div(&c.add(&s))
}

/// Even Taylor coefficients of cot(pi/2 (x/sqrt6 + 1/2)) in x: entry k is the
/// coefficient of x^{2k}.
///
/// With u = pi x / (2 sqrt6) we have u^{2k} = pi^{2k} x^{2k} / 24^k.
pub fn cot_even_coefficients(count: usize) -> Vec<AlgebraicConstant> {
    let series = cot_quarter_series(2 * count);
    (0..count)
        .map(|k| {
            let mut q = series.0[2 * k].clone();
            q /= Integer::from(Integer::u_pow_u(24, k as u32));
            AlgebraicConstant::monomial(q, 2 * k as i32, 0)
        })
        .collect()
}

/// Coefficients of x^{2k} in sqrt(1 - x^2).
pub fn sqrt_coefficients(count: usize) -> Vec<Rational> {
    let half = Rational::from((1, 2));
    (0..count)
        .map(|k| {
            let b = binomial_coefficient(&half, k as u32);
            if k % 2 == 0 {
                b
            } else {
                -b
            }
        })
        .collect()
}

fn cot_factor() -> BiPoly {
    let mut p = BiPoly::default();
    for (k, c) in cot_even_coefficients(EVEN_TERMS).into_iter().enumerate() {
        let e = 2 * k as u32;
        p.add_term(e, e, c);
    }
    p
}

fn sqrt_factor() -> BiPoly {
    let mut p = BiPoly::default();
    for (k, c) in sqrt_coefficients(EVEN_TERMS).into_iter().enumerate() {
        let e = 2 * k as u32;
        p.add_term(e, e, AlgebraicConstant::rational(c));
    }
    p.add_term(0, 2, AlgebraicConstant::ratio(-1, 2));
    p
}

/// y_n(x / lambda_n) as a polynomial in x and L.
pub fn y_polynomial() -> BiPoly {
    let half = Rational::from((1, 2));
    let mut p = BiPoly::default();
    for m in 2..=Y_TERMS {
        let mut c = binomial_coefficient(&half, m) * 2u32;
        if m % 2 == 1 {
            c = -c;
        }
        p.add_term(2 * m, 2 * m - 2, AlgebraicConstant::rational(c));
    }
    p
}

fn exp_factor() -> BiPoly {
    let y = y_polynomial();
    let mut out = BiPoly::one();
    let mut power = BiPoly::one();
    let mut fact = 1i64;
    for j in 1..=EXP_DEGREE as i64 {
        power = power.mul(&y);
        fact *= j;
        out = out.add(&power.scale(&AlgebraicConstant::ratio(1, fact)));
    }
    out
}

/// The full polynomial part of the integrand.
pub fn integrand_product() -> BiPoly {
    cot_factor().mul(&sqrt_factor()).mul(&exp_factor())
}

/// The coefficient of L^m: a polynomial in x (even powers only).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolynomialLayer {
    pub m: u32,
    /// x power to coefficient.
    pub poly: BTreeMap<u32, AlgebraicConstant>,
}

impl PolynomialLayer {
    pub fn coeff(&self, x_pow: u32) -> AlgebraicConstant {
        self.poly.get(&x_pow).cloned().unwrap_or_default()
    }

    /// Integral against e^{-x^2} over the real line, divided by sqrt(pi).
    pub fn gaussian_integral(&self) -> AlgebraicConstant {
        let mut acc = AlgebraicConstant::zero();
        for (&k, c) in &self.poly {
            acc = &acc + &c.scale(&gaussian_moment_unchecked(k));
        }
        acc
    }
}

/// All layers of [`integrand_product`], in increasing order of m.
pub fn build_integrand_layers() -> Vec<PolynomialLayer> {
    let mut layers: BTreeMap<u32, BTreeMap<u32, AlgebraicConstant>> = BTreeMap::new();
    for (&(i, j), c) in integrand_product().terms() {
        debug_assert!(i % 2 == 0 && j % 2 == 0);
        layers.entry(j).or_default().insert(i, c.clone());
    }
    layers
        .into_iter()
        .map(|(m, poly)| PolynomialLayer { m, poly })
        .collect()
}

/// (m-1)!!/2^{m/2}, the integral of x^m e^{-x^2} over the real line divided
/// by sqrt(pi), for even m in 0..=16.
pub fn gaussian_moment(m: u32) -> Result<Rational> {
    if m % 2 == 1 || m > 16 {
        return Err(Error::InvalidArgument(format!(
            "gaussian moment needs even m in 0..=16, got {m}"
        )));
    }
    Ok(gaussian_moment_unchecked(m))
}

/// Same formula for any even m; zero for odd m.
pub(crate) fn gaussian_moment_unchecked(m: u32) -> Rational {
    if m % 2 == 1 {
        return Rational::new();
    }
    let mut num = Integer::from(1);
    let mut k = 1;
    while k < m {
        num *= k;
        k += 2;
    }
    Rational::from((num, Integer::from(1) << (m / 2)))
}

/// Integrates the layers below [`REMAINDER_LAYER`] against e^{-x^2}. The
/// result is a series in 1/lambda whose coefficients carry an implicit
/// factor sqrt(pi).
pub fn integrate_layers(layers: &[PolynomialLayer]) -> TruncatedAsymptoticSeries {
    let mut coeffs = vec![AlgebraicConstant::zero(); REMAINDER_LAYER as usize];
    for layer in layers.iter().filter(|l| l.m < REMAINDER_LAYER) {
        coeffs[layer.m as usize] = layer.gaussian_integral();
    }
    TruncatedAsymptoticSeries::new(SeriesVar::LambdaInv, coeffs, REMAINDER_LAYER as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pi(q: (i64, i64), k: i32) -> AlgebraicConstant {
        AlgebraicConstant::monomial(Rational::from(q), k, 0)
    }

    fn sum(parts: &[AlgebraicConstant]) -> AlgebraicConstant {
        parts.iter().fold(AlgebraicConstant::zero(), |a, b| &a + b)
    }

    #[test]
    fn cot_coefficients_match_known_expansion() {
        let c = cot_even_coefficients(5);
        assert_eq!(c[0], pi((1, 1), 0));
        assert_eq!(c[1], pi((1, 12), 2));
        assert_eq!(c[2], pi((5, 864), 4));
        assert_eq!(c[3], pi((61, 155520), 6));
        assert_eq!(c[4], pi((277, 10450944), 8));
    }

    #[test]
    fn sqrt_coefficients_match() {
        let c = sqrt_coefficients(5);
        let want = [(1, 1), (-1, 2), (-1, 8), (-1, 16), (-5, 128)];
        for (got, w) in c.iter().zip(want) {
            assert_eq!(*got, Rational::from(w));
        }
    }

    #[test]
    fn y_leading_terms() {
        let y = y_polynomial();
        assert_eq!(y.coeff(4, 2), pi((-1, 4), 0));
        assert_eq!(y.coeff(6, 4), pi((-1, 8), 0));
        assert_eq!(y.coeff(8, 6), pi((-5, 64), 0));
        assert_eq!(y.coeff(10, 8), pi((-7, 128), 0));
    }

    #[test]
    fn moments() {
        assert_eq!(gaussian_moment(0).unwrap(), 1);
        assert_eq!(gaussian_moment(2).unwrap(), Rational::from((1, 2)));
        assert_eq!(gaussian_moment(4).unwrap(), Rational::from((3, 4)));
        assert_eq!(gaussian_moment(16).unwrap(), Rational::from((2027025, 256)));
        assert!(gaussian_moment(3).is_err());
        assert!(gaussian_moment(18).is_err());
    }

    #[test]
    fn layers_reproduce_the_expanded_integrand() {
        let layers = build_integrand_layers();
        let get = |m: u32| layers.iter().find(|l| l.m == m).unwrap();
        assert_eq!(get(0).poly.len(), 1);
        assert_eq!(get(0).coeff(0), pi((1, 1), 0));

        let l2 = get(2);
        assert_eq!(l2.poly.len(), 3);
        assert_eq!(l2.coeff(0), pi((-1, 2), 0));
        assert_eq!(l2.coeff(2), &pi((1, 12), 2) - &pi((1, 2), 0));
        assert_eq!(l2.coeff(4), pi((-1, 4), 0));

        let l4 = get(4);
        assert_eq!(l4.poly.len(), 4);
        assert_eq!(l4.coeff(2), pi((-1, 24), 2));
        assert_eq!(l4.coeff(4), sum(&[pi((5, 864), 4), pi((-36, 864), 2)]));
        assert_eq!(l4.coeff(6), pi((-1, 48), 2));
        assert_eq!(l4.coeff(8), pi((1, 32), 0));

        let l6 = get(6);
        assert_eq!(l6.poly.len(), 5);
        assert_eq!(l6.coeff(4), pi((-5, 1728), 4));
        assert_eq!(l6.coeff(6), sum(&[pi((61, 155520), 6), pi((-450, 155520), 4)]));
        assert_eq!(l6.coeff(8), pi((-5, 3456), 4));
        assert_eq!(l6.coeff(10), sum(&[pi((405, 155520), 2), pi((2430, 155520), 0)]));
        assert_eq!(l6.coeff(12), pi((-1, 384), 0));

        let l8 = get(8);
        assert_eq!(l8.poly.len(), 6);
        assert_eq!(l8.coeff(6), pi((-61, 311040), 6));
        assert_eq!(l8.coeff(8), sum(&[pi((277, 10450944), 8), pi((-61, 311040), 6)]));
        assert_eq!(l8.coeff(10), pi((-61, 622080), 6));
        assert_eq!(
            l8.coeff(12),
            sum(&[pi((5, 27648), 4), pi((1, 768), 2), pi((7, 768), 0)])
        );
        assert_eq!(l8.coeff(14), sum(&[pi((-1, 4608), 2), pi((-1, 384), 0)]));
        assert_eq!(l8.coeff(16), pi((1, 6144), 0));

        assert!(layers.iter().all(|l| l.m % 2 == 0 && l.poly.keys().all(|k| k % 2 == 0)));
    }

    #[test]
    fn integrated_layers_match_common_denominator_form() {
        let s = integrate_layers(&build_integrand_layers());
        let d = 127401984;
        let frac = |parts: &[(i64, i32)]| {
            sum(&parts.iter().map(|&(c, k)| pi((c, d), k)).collect::<Vec<_>>())
        };
        assert_eq!(s.coeff(0), pi((1, 1), 0));
        assert_eq!(s.coeff(2), frac(&[(5308416, 2), (-119439360, 0)]));
        assert_eq!(s.coeff(2), &pi((1, 24), 2) - &pi((15, 16), 0));
        assert_eq!(s.coeff(4), frac(&[(552960, 4), (-11612160, 2), (26127360, 0)]));
        assert_eq!(
            s.coeff(6),
            frac(&[(93696, 6), (-2177280, 4), (9797760, 2), (4898880, 0)])
        );
        assert_eq!(
            s.coeff(8),
            frac(&[(22160, 8), (-579744, 6), (3742200, 4), (-2245320, 2), (2525985, 0)])
        );
        for odd in [1, 3, 5, 7, 9] {
            assert!(s.coeff(odd).is_zero());
        }
        assert_eq!(s.order(), Some(10));
    }
}
