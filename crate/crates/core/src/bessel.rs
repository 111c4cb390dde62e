//! The modified Bessel function I_{3/2} and its elementary bounds.

use rayon::prelude::*;

use crate::ball::Ball;
use crate::certificate::{CertRange, Certificate};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BesselEvalMode {
    /// (1/sqrt(2 pi y)) ((1 - 1/y) e^y + (1 + 1/y) e^{-y})
    ClosedForm,
    /// sum_m (y/2)^{2m+3/2} / (m! Gamma(m + 5/2)) with a rigorous tail bound.
    Series,
}

pub fn bessel_i32(y: &Ball, mode: BesselEvalMode) -> Result<Ball> {
    match mode {
        BesselEvalMode::ClosedForm => closed_form(y),
        BesselEvalMode::Series => series(y),
    }
}

fn closed_form(y: &Ball) -> Result<Ball> {
    if !y.is_positive() {
        return Err(Error::Domain {
            function: "bessel_i32 closed form",
            value: y.to_decimal(10),
        });
    }
    let prec = y.prec();
    let inv = y.recip()?;
    let one = Ball::one(prec);
    let ey = y.exp()?;
    let eny = y.neg().exp()?;
    let inner = one.sub(&inv).mul(&ey).add(&one.add(&inv).mul(&eny));
    let scale = Ball::pi(prec).mul(y).mul_2si(1).sqrt()?;
    inner.div(&scale)
}

fn series(y: &Ball) -> Result<Ball> {
    let prec = y.prec();
    if y.is_exact() && y.mid().is_zero() {
        return Ok(Ball::zero(prec));
    }
    if !y.is_positive() {
        return Err(Error::Domain {
            function: "bessel_i32 series",
            value: y.to_decimal(10),
        });
    }
    let half = y.mul_2si(-1);
    let q = half.sqr();
    // t_0 = (y/2)^{3/2} / Gamma(5/2) = (y/2)^{3/2} * 4 / (3 sqrt(pi))
    let sqrt_pi = Ball::pi(prec).sqrt()?;
    let mut term = half.mul(&half.sqrt()?).mul_i64(4).div(&sqrt_pi.mul_i64(3))?;
    let mut sum = Ball::zero(prec);
    let eps = Ball::exact(rug::Float::with_val(prec, rug::Float::i_exp(1, -(prec as i32))));
    let half_ball = Ball::ratio(1, 2, prec);
    for m in 0u32..100_000 {
        // ratio t_{m+1}/t_m = q / ((m+1)(m+5/2)), decreasing in m
        let ratio = q.div(&Ball::ratio(2 * (m as i64 + 1) * (2 * m as i64 + 5), 4, prec))?;
        let small = term.abs().definitely_le(&sum.abs().mul(&eps));
        if m > 0 && small && ratio.definitely_le(&half_ball) {
            // remaining terms <= t_m / (1 - r_m) <= 2 t_m
            let tail = term.abs_upper() * 2u32;
            return Ok(sum.add(&Ball::with_radius(
                rug::Float::with_val(prec, 0),
                &rug::Float::with_val(64, tail),
            )));
        }
        sum = sum.add(&term);
        term = term.mul(&ratio);
    }
    Err(Error::NonConvergence("bessel_i32 series".into()))
}

/// sqrt(2/(pi y)) e^y, the bound for y >= 1.
pub fn large_argument_bound(y: &Ball) -> Result<Ball> {
    let prec = y.prec();
    Ok(Ball::from_i64(2, prec)
        .div(&Ball::pi(prec).mul(y))?
        .sqrt()?
        .mul(&y.exp()?))
}

/// (2 sqrt2 / (3 sqrt pi)) y^{3/2}, the bound for 0 <= y < 1.
pub fn small_argument_bound(y: &Ball) -> Result<Ball> {
    let prec = y.prec();
    let c = Ball::from_i64(8, prec).sqrt()?.div(&Ball::pi(prec).sqrt()?.mul_i64(3))?;
    Ok(c.mul(y).mul(&y.sqrt()?))
}

/// Value of I_{3/2} used by the grid suite: the series below 1 and the
/// closed form from 1 on.
pub fn bessel_i32_auto(y: &Ball) -> Result<Ball> {
    if y.definitely_lt(&Ball::one(y.prec())) {
        bessel_i32(y, BesselEvalMode::Series)
    } else {
        bessel_i32(y, BesselEvalMode::ClosedForm)
    }
}

struct BesselSample {
    value: Ball,
    bound: Ball,
}

fn check_point(y: f64, prec: u32) -> Result<BesselSample> {
    let yb = Ball::from_f64(y, prec);
    let value = bessel_i32_auto(&yb)?;
    let bound = if y >= 1.0 {
        large_argument_bound(&yb)?
    } else {
        small_argument_bound(&yb)?
    };
    Ok(BesselSample { value, bound })
}

/// Checks both bounds at every grid point (y > 0), plus strict monotonicity
/// along the sorted grid.
pub fn check_bessel_bounds(grid: &[f64], prec: u32) -> Certificate {
    let mut cert = Certificate::new(
        "bessel_i32_bounds",
        CertRange::Samples {
            count: grid.len(),
            description: "I_{3/2}(y) <= sqrt(2/(pi y)) e^y for y >= 1, <= 2 sqrt2 y^{3/2}/(3 sqrt pi) for y < 1".into(),
        },
        prec,
    );
    let mut sorted: Vec<f64> = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let results: Vec<(f64, Result<BesselSample>)> = sorted
        .par_iter()
        .map(|&y| {
            let mut p = prec;
            loop {
                let r = check_point(y, p);
                match &r {
                    Ok(s) if !s.value.definitely_le(&s.bound) && p < 4 * prec => p *= 2,
                    _ => return (y, r),
                }
            }
        })
        .collect();

    let mut worst_ratio = 0f64;
    let mut prev: Option<(f64, Ball)> = None;
    for (y, r) in results {
        let sample = format!("y={y}");
        match r {
            Err(e) => {
                if y <= 0.0 {
                    cert.fail(sample, format!("grid point outside (0, inf): {e}"));
                } else {
                    cert.inconclusive(sample, e.to_string());
                }
            }
            Ok(s) => {
                if s.value.definitely_le(&s.bound) {
                    worst_ratio = worst_ratio.max(s.value.to_f64() / s.bound.to_f64());
                } else if s.bound.definitely_lt(&s.value) {
                    cert.fail(sample, format!("I={} > bound={}", s.value.to_decimal(12), s.bound.to_decimal(12)));
                } else {
                    cert.inconclusive(sample, "bound comparison undecided".to_string());
                }
                if let Some((py, pv)) = &prev {
                    if *py < y && !pv.definitely_lt(&s.value) {
                        cert.fail(format!("y={py}..{y}"), "I_{3/2} not increasing");
                    }
                }
                prev = Some((y, s.value));
            }
        }
    }
    cert.datum("max_value_over_bound", format!("{worst_ratio:.6}"));
    cert
}

/// y = j/1000 for j = 1..=50000.
pub fn default_grid() -> Vec<f64> {
    (1..=50_000).map(|j| j as f64 / 1000.0).collect()
}
