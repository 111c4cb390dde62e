//! Expansion of the k = 1 main term in s = n^{-1/2} and the constants A..E.
//!
//! Writing sqrt(24n + 1) = sqrt(24n) (1 + s^2/24)^{1/2}:
//!
//! * pi sqrt(24n+1) / (3 sqrt2) - 2 pi sqrt(n/3) = (2 pi / sqrt3) s^{-1} ((1 + s^2/24)^{1/2} - 1),
//! * 1/((24n+1) lambda_n) = (3^{1/4} / (24 sqrt(pi))) n^{-5/4} (1 + s^2/24)^{-5/4},
//! * lambda_n^{-2} = (sqrt3 / pi) s (1 + s^2/24)^{-1/2}.

use rug::Rational;
use serde::Serialize;

use super::constant::AlgebraicConstant;
use super::layers::{build_integrand_layers, integrate_layers};
use super::truncated::{SeriesVar, TruncatedAsymptoticSeries};
use crate::error::Result;

/// Truncation order in s: coefficients of s^0..s^4 are exact.
pub const ORDER: usize = 5;

fn q(p: i64, d: i64) -> AlgebraicConstant {
    AlgebraicConstant::ratio(p, d)
}

/// `c * pi^i * 3^{j/4}`
fn m(p: i64, d: i64, pi_exp: i32, t_exp: i32) -> AlgebraicConstant {
    AlgebraicConstant::monomial(Rational::from((p, d)), pi_exp, t_exp)
}

fn sum(parts: &[AlgebraicConstant]) -> AlgebraicConstant {
    parts.iter().fold(AlgebraicConstant::zero(), |a, b| &a + b)
}

/// The three prefactor series, all in s.
#[derive(Clone, Debug)]
pub struct PrefactorExpansions {
    /// e^{pi sqrt(24n+1)/(3 sqrt2)} / e^{2 pi sqrt(n/3)}
    pub exponential: TruncatedAsymptoticSeries,
    /// sqrt(pi) n^{5/4} / ((24n+1) lambda_n)
    pub normalization: TruncatedAsymptoticSeries,
    /// lambda_n^{-2}
    pub lambda_inv_sq: TruncatedAsymptoticSeries,
}

impl PrefactorExpansions {
    /// lambda_n^{-2k}
    pub fn lambda_inv_pow(&self, k: u32) -> TruncatedAsymptoticSeries {
        let mut out = TruncatedAsymptoticSeries::new(SeriesVar::S, vec![q(1, 1)], ORDER);
        for _ in 0..k {
            out = out.mul(&self.lambda_inv_sq).truncate(ORDER);
        }
        out
    }
}

pub fn prefactor_expansions() -> PrefactorExpansions {
    let half = Rational::from((1, 2));
    let c24 = q(1, 24);

    // One extra order, because the exponent loses a power of s to the s^{-1}.
    let root = TruncatedAsymptoticSeries::binomial(SeriesVar::S, &half, &c24, 2, ORDER + 1);
    let one = TruncatedAsymptoticSeries::constant(SeriesVar::S, q(1, 1));
    let exponent = root.sub(&one).shift_down(1).scale(&m(2, 3, 1, 2));
    let exponential = exponent.exp(ORDER);

    let normalization =
        TruncatedAsymptoticSeries::binomial(SeriesVar::S, &Rational::from((-5, 4)), &c24, 2, ORDER)
            .scale(&m(1, 24, 0, 1));

    let lambda_inv_sq =
        TruncatedAsymptoticSeries::binomial(SeriesVar::S, &-half, &c24, 2, ORDER - 1)
            .shift_up(1)
            .scale(&m(1, 1, -1, 2));

    PrefactorExpansions {
        exponential,
        normalization,
        lambda_inv_sq,
    }
}

/// Expansion coefficients of Theorem 1.1: u(n) ~ e^{2 pi sqrt(n/3)} n^{-5/4}
/// (A + B s + C s^2 + D s^3 + E s^4).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constants {
    pub a: AlgebraicConstant,
    pub b: AlgebraicConstant,
    pub c: AlgebraicConstant,
    pub d: AlgebraicConstant,
    pub e: AlgebraicConstant,
}

impl Constants {
    pub fn as_array(&self) -> [&AlgebraicConstant; 5] {
        [&self.a, &self.b, &self.c, &self.d, &self.e]
    }

    pub fn names() -> [&'static str; 5] {
        ["A", "B", "C", "D", "E"]
    }
}

/// Output of the derivation pipeline.
#[derive(Clone, Debug)]
pub struct Derivation {
    /// Integrated layers in 1/lambda, in units of sqrt(pi).
    pub lambda_series: TruncatedAsymptoticSeries,
    /// The expansion in s in units of sqrt(pi) e^{2 pi sqrt(n/3)} / (8 3^{3/4} sqrt(pi) n^{5/4}).
    pub bracket: TruncatedAsymptoticSeries,
    pub constants: Constants,
}

pub fn derive() -> Derivation {
    let lambda_series = integrate_layers(&build_integrand_layers());
    let pre = prefactor_expansions();

    let mut in_s = TruncatedAsymptoticSeries::new(SeriesVar::S, vec![], ORDER);
    for k in 0..lambda_series.coeffs().len() / 2 {
        let c = lambda_series.coeff(2 * k);
        if !c.is_zero() {
            in_s = in_s.add(&pre.lambda_inv_pow(k as u32).scale(&c));
        }
    }
    let full = in_s
        .mul(&pre.exponential)
        .mul(&pre.normalization)
        .truncate(ORDER);
    let bracket = full.scale(&m(8, 1, 0, 3));
    let constants = Constants {
        a: full.coeff(0),
        b: full.coeff(1),
        c: full.coeff(2),
        d: full.coeff(3),
        e: full.coeff(4),
    };
    Derivation {
        lambda_series,
        bracket,
        constants,
    }
}

pub fn derive_constants() -> Constants {
    derive().constants
}

/// The constants exactly as printed in the paper's definition of A..E.
pub fn displayed_constants() -> Constants {
    Constants {
        a: m(1, 8, 0, -3),
        b: sum(&[m(1, 144, 1, -1), m(-5, 128, -1, 3)]),
        c: sum(&[m(105, 4096, -2, 1), m(13, 6912, 2, -3), m(-35, 768, 0, -3)]),
        d: sum(&[
            m(-91, 12288, 1, -1),
            m(105, 8192, -1, 3),
            m(7, 23328, 3, -1),
            m(315, 65536, -3, 3),
        ]),
        e: sum(&[
            m(7441, 35831803, 4, -3),
            m(-77, 13824, 2, -3),
            m(5005, 131072, 0, -3),
            m(-1155, 131072, -2, 1),
            m(31185, 4194304, -4, 1),
        ]),
    }
}

/// The brackets multiplying n^{-k/2} in the paper's expansion just before
/// the definition of A..E, divided by sqrt(pi).
pub fn displayed_brackets() -> [AlgebraicConstant; 5] {
    [
        q(1, 1),
        // pi^{3/2}/(6 sqrt3) - 15 sqrt3/(16 sqrt pi)
        sum(&[m(1, 6, 1, -2), m(-15, 16, -1, 2)]),
        sum(&[m(13, 864, 2, 0), q(-35, 96), m(315, 512, -2, 0)]),
        sum(&[
            m(7, 972, 3, -2),
            m(-91, 512, 1, -2),
            m(315, 1024, -1, 2),
            m(945, 8192, -3, 2),
        ]),
        sum(&[
            m(7441, 4478976, 4, 0),
            m(-77, 1728, 2, 0),
            m(5005, 16384, 0, 0),
            m(-3465, 16384, -2, 0),
            m(93555, 524288, -4, 0),
        ]),
    ]
}

/// The s-coefficients of e^{pi sqrt(24n+1)/(3 sqrt2) - 2 pi sqrt(n/3)} as
/// printed, reading the "x" between the s^3 and s^4 terms as "+".
pub fn displayed_exponential() -> [AlgebraicConstant; 5] {
    [
        q(1, 1),
        m(1, 24, 1, -2),
        m(1, 3456, 2, 0),
        sum(&[m(34560, 8599633920, 3, -2), m(-3732480, 8599633920, 1, -2)]),
        sum(&[m(1, 71663616, 4, 0), m(-1, 165888, 2, 0)]),
    ]
}

/// Result of comparing a derived constant with its printed form.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantComparison {
    pub name: String,
    pub derived: String,
    pub displayed: String,
    pub equal: bool,
    /// Difference derived - displayed, when nonzero.
    pub difference: Option<String>,
}

pub fn compare(name: &str, derived: &AlgebraicConstant, displayed: &AlgebraicConstant) -> ConstantComparison {
    let diff = derived - displayed;
    ConstantComparison {
        name: name.to_string(),
        derived: derived.to_string(),
        displayed: displayed.to_string(),
        equal: diff.is_zero(),
        difference: (!diff.is_zero()).then(|| diff.to_string()),
    }
}

/// Compares A..E with the printed definitions.
pub fn compare_constants(derived: &Constants) -> Vec<ConstantComparison> {
    let shown = displayed_constants();
    Constants::names()
        .iter()
        .zip(derived.as_array().iter().zip(shown.as_array()))
        .map(|(name, (d, s))| compare(name, d, s))
        .collect()
}

/// For E: the denominator D such that the pi^4 term reads 7441 pi^4/(D 3^{3/4}).
/// Returns (derived D, printed D).
pub fn e_leading_denominator(derived: &Constants) -> (Rational, Rational) {
    // 3^{-3/4} = t/3, so the pi^4 t coefficient is 7441/(3 D).
    let den = |c: &AlgebraicConstant| Rational::from(7441) / (c.coeff(4, 1) * 3u32);
    (den(&derived.e), den(&displayed_constants().e))
}

/// Leading and subleading coefficients of
/// (u(n)^2 - u(n-1)u(n+1)) n^4 e^{-4 pi sqrt(n/3)} = c0 + c1 n^{-1/2} + O(1/n).
///
/// With L = log u and kappa = 2 pi/sqrt3, the second difference of L is
/// -kappa/4 n^{-3/2} + 5/4 n^{-2} + O(n^{-5/2}), so the delta is
/// u(n)^2 (kappa/4 n^{-3/2} - 5/4 n^{-2} + ...) and
/// c0 = pi A^2/(2 sqrt3), c1 = -5A^2/4 + pi A B/sqrt3. B^2 first appears at order 1/n.
pub fn corollary_coefficients(a: &AlgebraicConstant, b: &AlgebraicConstant) -> (AlgebraicConstant, AlgebraicConstant) {
    let a2 = a * a;
    let c0 = &a2 * &m(1, 6, 1, 2);
    let c1 = sum(&[a2.scale_ratio(-5, 4), &(a * b) * &m(1, 3, 1, 2)]);
    (c0, c1)
}

/// The subleading coefficient in the printed form, -5A^2/4 + pi A B/sqrt3 - B^2.
pub fn displayed_corollary_c1(a: &AlgebraicConstant, b: &AlgebraicConstant) -> AlgebraicConstant {
    let (_, c1) = corollary_coefficients(a, b);
    &c1 - &(b * b)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantExport {
    pub name: String,
    pub exact: String,
    pub decimal: String,
}

/// Exact and decimal renderings, for reports.
pub fn export(name: &str, c: &AlgebraicConstant, digits: usize, prec: u32) -> Result<ConstantExport> {
    Ok(ConstantExport {
        name: name.to_string(),
        exact: c.to_string(),
        decimal: c.eval(prec)?.mid_decimal(digits),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_prefactor() {
        let e = prefactor_expansions().exponential;
        let shown = displayed_exponential();
        for (k, want) in shown.iter().enumerate() {
            assert_eq!(e.coeff(k), *want, "s^{k}");
        }
    }

    #[test]
    fn normalization_prefactor() {
        let n = prefactor_expansions().normalization;
        let a = m(1, 8, 0, -3);
        assert_eq!(n.coeff(0), a);
        assert!(n.coeff(1).is_zero());
        assert_eq!(n.coeff(2), a.scale_ratio(-5, 96));
        assert!(n.coeff(3).is_zero());
        assert_eq!(n.coeff(4), a.scale_ratio(5, 2048));
    }

    #[test]
    fn lambda_powers() {
        let p = prefactor_expansions();
        let l2 = p.lambda_inv_pow(1);
        assert_eq!(l2.coeff(1), m(1, 1, -1, 2));
        assert_eq!(l2.coeff(3), m(-1, 48, -1, 2)); // -1/(16 sqrt3 pi)
        let l4 = p.lambda_inv_pow(2);
        assert_eq!(l4.coeff(2), m(3, 1, -2, 0));
        assert_eq!(l4.coeff(4), m(-1, 8, -2, 0));
        assert_eq!(p.lambda_inv_pow(3).coeff(3), m(3, 1, -3, 2));
        assert_eq!(p.lambda_inv_pow(4).coeff(4), m(9, 1, -4, 0));
    }

    #[test]
    fn a_through_d_match_and_e_differs_only_in_pi4_term() {
        let c = derive_constants();
        let cmp = compare_constants(&c);
        for row in &cmp[..4] {
            assert!(row.equal, "{} derived {} shown {}", row.name, row.derived, row.displayed);
        }
        assert!(!cmp[4].equal);
        let (derived, shown) = e_leading_denominator(&c);
        assert_eq!(derived, 35831808);
        assert_eq!(shown, 35831803);
        let diff = &c.e - &displayed_constants().e;
        assert!(diff.terms().all(|(&(i, j), _)| i == 4 && j == 1));
    }

    #[test]
    fn brackets_match_print() {
        let d = derive();
        let shown = displayed_brackets();
        for (k, want) in shown.iter().enumerate() {
            assert_eq!(d.bracket.coeff(k), *want, "n^-{k}/2 bracket");
        }
    }

    #[test]
    fn b_simplifies() {
        // (pi^{3/2}/(6 sqrt3) - 15 sqrt3/(16 sqrt pi)) / (8 3^{3/4} sqrt pi)
        let bracket = displayed_brackets()[1].clone();
        let b = &bracket * &m(1, 8, 0, -3);
        assert_eq!(b, displayed_constants().b);
        assert_eq!(m(1, 48, 1, -5), m(1, 144, 1, -1));
    }

    #[test]
    fn corollary_coefficients_values() {
        let c = derive_constants();
        let (c0, c1) = corollary_coefficients(&c.a, &c.b);
        let v0 = c0.eval(256).unwrap().to_f64();
        let v1 = c1.eval(256).unwrap().to_f64();
        assert!((v0 - 0.0027271).abs() < 1e-6, "{v0}");
        assert!((v1 + 0.004_929_09).abs() < 1e-7, "{v1}");
        let (z0, z1) = corollary_coefficients(&AlgebraicConstant::zero(), &c.b);
        assert!(z0.is_zero());
        assert!(z1.is_zero());
        let printed = displayed_corollary_c1(&AlgebraicConstant::zero(), &c.b);
        assert_eq!(printed, -(&c.b * &c.b));
        let shown = displayed_corollary_c1(&c.a, &c.b).eval(256).unwrap().to_f64();
        assert!((shown + 0.005_067_54).abs() < 1e-7, "{shown}");
    }

    #[test]
    fn renders_a() {
        let c = derive_constants();
        let e = export("A", &c.a, 12, 256).unwrap();
        assert_eq!(e.exact, "1/(8*3^(3/4))");
        assert!(e.decimal.starts_with("0.0548364172"), "{}", e.decimal);
    }
}
