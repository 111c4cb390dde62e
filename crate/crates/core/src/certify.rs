//! Numeric evaluation of the asymptotic formula and its log-concavity
//! corollary, and the end-to-end log-concavity certificate.

use rug::Integer;
use serde::Serialize;

use crate::ball::{escalate, Ball};
use crate::certificate::{CertRange, Certificate, Verdict};
use crate::error::{Error, Result};
use crate::quadrature::{main_exponential, N0};
use crate::series::{logconcavity_scan, NatSeries, SeriesKind, CLAIMED_EXCEPTIONS};
use crate::symbolic::derivation::displayed_corollary_c1;
use crate::symbolic::{corollary_coefficients, derive_constants, Constants};

/// Constant of the O(n^{-5/2}) term in the asymptotic formula.
pub const THEOREM_CONSTANT: i64 = 478;
/// Constant of the O(n^{-1}) term in the log-concavity expansion.
pub const COROLLARY_CONSTANT: i64 = 106;
/// Lowest precision used for comparisons against exact values of u(n).
pub const CONTAINMENT_PRECISION: u32 = 2048;

/// e^{2 pi sqrt(n/3)} n^{-5/4} (A + B s + C s^2 + D s^3 + E s^4), s = n^{-1/2},
/// with envelope 478 e^{2 pi sqrt(n/3)} n^{-5/4} n^{-5/2}.
#[derive(Clone, Debug)]
pub struct AsymptoticEstimate {
    pub n: u64,
    pub main: Ball,
    pub error_envelope: Ball,
    pub precision: u32,
}

/// Outcome of comparing an exact u(n) with an [`AsymptoticEstimate`].
#[derive(Clone, Debug, Serialize)]
pub struct Containment {
    pub n: u64,
    /// |u(n) - main| / envelope, upper end of the enclosing ball
    pub residual_over_envelope: String,
    pub main: String,
    pub envelope: String,
    pub verdict: Verdict,
}

fn n_pow_quarter(n: u64, quarters: i64, prec: u32) -> Result<Ball> {
    Ball::from_i64(n as i64, prec).pow_ratio(quarters, 4)
}

fn constants_balls(c: &Constants, prec: u32) -> Result<[Ball; 5]> {
    let arr = c.as_array();
    Ok([
        arr[0].eval(prec)?,
        arr[1].eval(prec)?,
        arr[2].eval(prec)?,
        arr[3].eval(prec)?,
        arr[4].eval(prec)?,
    ])
}

/// The five-term asymptotic formula with its explicit envelope.
pub fn asymptotic_u(n: u64, prec: u32) -> Result<AsymptoticEstimate> {
    asymptotic_u_with(&derive_constants(), n, prec)
}

/// [`asymptotic_u`] with precomputed constants.
pub fn asymptotic_u_with(constants: &Constants, n: u64, prec: u32) -> Result<AsymptoticEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("asymptotic_u needs n >= 1".into()));
    }
    let c = constants_balls(constants, prec)?;
    let s = Ball::from_i64(n as i64, prec).sqrt()?.recip()?;
    let mut poly = Ball::zero(prec);
    for coeff in c.iter().rev() {
        poly = poly.mul(&s).add(coeff);
    }
    let scale = main_exponential(n, prec)?.div(&n_pow_quarter(n, 5, prec)?)?;
    let main = scale.mul(&poly);
    let error_envelope = scale
        .mul(&Ball::from_i64(THEOREM_CONSTANT, prec))
        .div(&n_pow_quarter(n, 10, prec)?)?;
    Ok(AsymptoticEstimate {
        n,
        main,
        error_envelope,
        precision: prec,
    })
}

impl AsymptoticEstimate {
    /// |u - main| as a ball.
    pub fn residual(&self, u: &Integer) -> Ball {
        Ball::from_integer(u, self.precision).sub(&self.main).abs()
    }

    pub fn containment(&self, u: &Integer) -> Result<Containment> {
        let residual = self.residual(u);
        let ratio = residual.div(&self.error_envelope)?;
        let verdict = if residual.definitely_le(&self.error_envelope) {
            Verdict::Verified
        } else if self.error_envelope.definitely_lt(&residual) {
            Verdict::Failed
        } else {
            Verdict::Inconclusive
        };
        Ok(Containment {
            n: self.n,
            residual_over_envelope: format_upper(&ratio),
            main: self.main.mid_decimal(20),
            envelope: self.error_envelope.mid_decimal(20),
            verdict,
        })
    }
}

fn format_upper(b: &Ball) -> String {
    crate::ball::plain_decimal(&b.upper().to_string_radix(10, Some(12)))
}

/// Bounds for (u(n)^2 - u(n-1)u(n+1)) n^4 e^{-4 pi sqrt(n/3)}.
#[derive(Clone, Debug)]
pub struct CorollaryBounds {
    pub n: u64,
    pub c0: Ball,
    pub c1: Ball,
    pub lower: Ball,
    pub upper: Ball,
}

/// c0 +- (|c1| n^{-1/2} + 106/n).
pub fn corollary_delta(n: u64, prec: u32) -> Result<CorollaryBounds> {
    corollary_delta_with(&derive_constants(), n, prec)
}

pub fn corollary_delta_with(constants: &Constants, n: u64, prec: u32) -> Result<CorollaryBounds> {
    if n < N0 {
        return Err(Error::BelowThreshold { n, min: N0 });
    }
    let (c0, c1) = corollary_coefficients(&constants.a, &constants.b);
    let c0 = c0.eval(prec)?;
    let c1 = c1.eval(prec)?;
    let nb = Ball::from_i64(n as i64, prec);
    let spread = c1
        .abs()
        .div(&nb.sqrt()?)?
        .add(&Ball::from_i64(COROLLARY_CONSTANT, prec).div(&nb)?);
    Ok(CorollaryBounds {
        n,
        lower: c0.sub(&spread),
        upper: c0.add(&spread),
        c0,
        c1,
    })
}

/// delta n^4 e^{-4 pi sqrt(n/3)} for an exact delta.
pub fn scaled_delta(n: u64, delta: &Integer, prec: u32) -> Result<Ball> {
    let e = main_exponential(n, prec)?.sqr();
    Ball::from_integer(delta, prec)
        .mul(&Ball::from_i64(n as i64, prec).powi(4))
        .div(&e)
}

impl CorollaryBounds {
    pub fn contains(&self, scaled: &Ball) -> Verdict {
        if self.lower.definitely_le(scaled) && scaled.definitely_le(&self.upper) {
            Verdict::Verified
        } else if scaled.definitely_lt(&self.lower) || self.upper.definitely_lt(scaled) {
            Verdict::Failed
        } else {
            Verdict::Inconclusive
        }
    }
}

/// c0 - |c1| s - 106 s^2; decreasing in s > 0 since every s-term is
/// non-positive.
pub fn tail_positivity_margin(constants: &Constants, s: &Ball) -> Result<Ball> {
    let prec = s.prec();
    let (c0, c1) = corollary_coefficients(&constants.a, &constants.b);
    Ok(c0
        .eval(prec)?
        .sub(&c1.eval(prec)?.abs().mul(s))
        .sub(&Ball::from_i64(COROLLARY_CONSTANT, prec).mul(&s.sqr())))
}

/// Exact scan on [1, n_switch] plus the positivity of the corollary's lower
/// bound at n_switch. `u` must cover 0..=n_switch+1.
pub fn certify_all(u: &NatSeries, n_switch: u64, prec: u32) -> Result<Certificate> {
    if n_switch < N0 {
        return Err(Error::BelowThreshold { n: n_switch, min: N0 });
    }
    if u.kind() != SeriesKind::U {
        return Err(Error::WrongKind {
            expected: SeriesKind::U.name(),
            found: u.kind().name(),
        });
    }
    let constants = derive_constants();
    let scan = logconcavity_scan(u, 1, n_switch)?;
    let found = scan.exception_set();

    let mut cert = Certificate::new(
        "unimodal_log_concave_outside_exception_set",
        CertRange::Interval {
            from: "1".into(),
            to: "inf".into(),
        },
        prec,
    );
    cert.exception_set = Some(found.clone());
    cert.input_checksums
        .insert(format!("u_table_0..={}", u.n_max()), u.checksum());
    cert.datum("n_switch", n_switch)
        .datum("scan_range", format!("1..={n_switch}"))
        .datum("scan_exceptions", format!("{found:?}"))
        .datum("claimed_exceptions", format!("{CLAIMED_EXCEPTIONS:?}"));
    for n in 1..=7u64.min(n_switch) {
        cert.datum(format!("delta_{n}"), scan.delta_at(n).expect("in range"));
    }

    let cmp = scan.claim_comparison();
    if !cmp.agrees() {
        cert.note(format!(
            "exact exception set {found:?} differs from the claimed {CLAIMED_EXCEPTIONS:?}: unclaimed {:?}, claimed but positive {:?}",
            cmp.unclaimed, cmp.missing_from_scan
        ));
    }
    if let Some(big) = found.iter().find(|&&n| n >= 8) {
        cert.note(format!("exception at n = {big} >= 8"));
    }

    // leg for n >= n_switch
    let margin = escalate(
        prec,
        8 * prec,
        |p| {
            let s = Ball::from_i64(n_switch as i64, p).sqrt()?.recip()?;
            tail_positivity_margin(&constants, &s)
        },
        |m| m.is_positive() || m.is_negative(),
    )?;
    let (c0, c1) = corollary_coefficients(&constants.a, &constants.b);
    cert.datum("c0", c0.eval(prec)?.mid_decimal(20))
        .datum("c1", c1.eval(prec)?.mid_decimal(20))
        .datum(
            "c1_printed",
            displayed_corollary_c1(&constants.a, &constants.b).eval(prec)?.mid_decimal(20),
        )
        .datum("tail_margin_at_n_switch", margin.value.mid_decimal(20))
        .datum("tail_margin_precision", margin.precision);
    if !margin.decided {
        cert.inconclusive(
            format!("n={n_switch}"),
            format!("c0 - |c1| s - 106 s^2 undecided at {} bits", margin.precision),
        );
    } else if !margin.value.is_positive() {
        cert.fail(
            format!("n={n_switch}"),
            format!("c0 - |c1| s - 106 s^2 = {} <= 0", margin.value.to_decimal(12)),
        );
    }

    // the two explicit formulas at n_switch, when the table reaches it
    let cp = prec.max(CONTAINMENT_PRECISION);
    if let (Ok(un), Ok(prev), Ok(next)) = (
        u.get(n_switch as usize),
        u.get(n_switch as usize - 1),
        u.get(n_switch as usize + 1),
    ) {
        let c = asymptotic_u_with(&constants, n_switch, cp)?.containment(un)?;
        cert.datum("asymptotic_residual_over_envelope", &c.residual_over_envelope);
        cert.datum("asymptotic_containment", format!("{:?}", c.verdict));
        let mut delta = Integer::from(un.square_ref());
        delta -= Integer::from(prev * next);
        let bounds = corollary_delta_with(&constants, n_switch, cp)?;
        let scaled = scaled_delta(n_switch, &delta, cp)?;
        cert.datum("scaled_delta_at_n_switch", scaled.mid_decimal(20));
        // distance of the exact value from the two-term expansion, for the
        // derived and the printed subleading coefficient
        let s = Ball::from_i64(n_switch as i64, cp).sqrt()?.recip()?;
        let printed = displayed_corollary_c1(&constants.a, &constants.b).eval(cp)?;
        let two_term = |c1: &Ball| bounds.c0.add(&c1.mul(&s));
        cert.datum("two_term_gap_derived_c1", scaled.sub(&two_term(&bounds.c1)).mid_decimal(6))
            .datum("two_term_gap_printed_c1", scaled.sub(&two_term(&printed)).mid_decimal(6));
        cert.datum("corollary_containment", format!("{:?}", bounds.contains(&scaled)));
    }
    Ok(cert)
}

/// Values of k for the cot-sum ingredient suite.
pub const RBOUND_KS: [u64; 12] = [2, 3, 4, 5, 6, 7, 8, 10, 16, 50, 100, 500];

/// Runs every lemma grid suite: the Bessel bounds, the cot-sum ingredients
/// and the saddle-point remainder constants. `coarse` thins the grids.
pub fn lemma_suites(coarse: bool, prec: u32) -> Result<Vec<Certificate>> {
    let bessel_grid: Vec<f64> = if coarse {
        (1..=500).map(|j| j as f64 / 10.0).collect()
    } else {
        crate::bessel::default_grid()
    };
    let bessel = crate::bessel::check_bessel_bounds(&bessel_grid, prec);

    let steps = if coarse { 10 } else { 100 };
    let samples: Vec<f64> = (-steps..=steps).map(|j| j as f64 / steps as f64).collect();
    let ks: &[u64] = if coarse { &RBOUND_KS[..8] } else { &RBOUND_KS };
    let mut rbound = Certificate::new(
        "cot_sum_ingredients",
        CertRange::Samples {
            count: ks.len() * samples.len(),
            description: format!("k in {ks:?}, x = j/{steps} in [-1, 1], all r"),
        },
        prec,
    );
    let parts: Vec<Result<Certificate>> = {
        use rayon::prelude::*;
        ks.par_iter()
            .map(|&k| crate::quadrature::check_rbound_ingredients(k, &samples, prec))
            .collect()
    };
    for (k, part) in ks.iter().zip(parts) {
        rbound.absorb(&format!("k={k}"), &part?);
    }

    let grid = if coarse {
        crate::remainders::RemainderGrid::coarse()
    } else {
        crate::remainders::RemainderGrid::default()
    };
    let grid = crate::remainders::RemainderGrid {
        precision: grid.precision.max(prec),
        ..grid
    };
    let (remainders, _) = crate::remainders::check_remainder_constants(&grid)?;
    Ok(vec![bessel, rbound, remainders])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::gen_all;

    #[test]
    fn leading_ratio_tends_to_a() {
        let n = 10u64.pow(12);
        let est = asymptotic_u(n, 256).unwrap();
        let ratio = est
            .main
            .mul(&n_pow_quarter(n, 5, 256).unwrap())
            .div(&main_exponential(n, 256).unwrap())
            .unwrap();
        assert!((ratio.to_f64() - 0.054_836_4).abs() < 1e-6, "{}", ratio.to_f64());
    }

    #[test]
    fn envelope_scaling() {
        let a = asymptotic_u(N0, 512).unwrap();
        let b = asymptotic_u(4 * N0, 512).unwrap();
        let ra = a.error_envelope.div(&a.main).unwrap().to_f64();
        let rb = b.error_envelope.div(&b.main).unwrap().to_f64();
        assert!((rb / ra - 1.0 / 32.0).abs() < 1e-3, "{}", rb / ra);
    }

    #[test]
    fn margin_is_positive_and_decreasing() {
        let c = derive_constants();
        let m0 = tail_positivity_margin(&c, &Ball::from_f64(0.0, 128)).unwrap();
        let m1 = tail_positivity_margin(&c, &Ball::from_f64(0.003_162_277_66, 128)).unwrap();
        let m2 = tail_positivity_margin(&c, &Ball::from_f64(0.01, 128)).unwrap();
        assert!(m0.definitely_lt(&Ball::from_f64(0.0028, 128)));
        assert!(m1.definitely_lt(&m0) && m2.definitely_lt(&m1));
        assert!((m1.to_f64() - 0.00165).abs() < 5e-5, "{}", m1.to_f64());
    }

    #[test]
    fn rejects_small_switch() {
        let (_, _, u) = gen_all(10).unwrap();
        assert!(matches!(
            certify_all(&u, 9, 128),
            Err(Error::BelowThreshold { n: 9, .. })
        ));
        assert!(corollary_delta(N0 - 1, 128).is_err());
    }
}
