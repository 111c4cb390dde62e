//! The k = 1 term of the exact formula by Gauss-Legendre quadrature, and the
//! bounds used for the terms k >= 2.
//!
//! The k = 1 integral is taken over x in [-1, 1] after substituting
//! x = sin(theta), which removes the square-root singularities at the end
//! points:
//!
//! ```text
//! (1/(24n+1)) int_{-pi/2}^{pi/2} cot(pi/2 (sin(t)/sqrt6 + 1/2)) cos(t)
//!     [ (cos(t) - c) e^{a cos(t)} + (cos(t) + c) e^{-a cos(t)} ] dt
//! ```
//!
//! with a = pi sqrt(24n+1)/(3 sqrt2) and c = 1/a. The peak at t = 0 has width
//! about a^{-1/2}, so the interval is cut into panels of that scale.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rug::{Float, Integer};
use serde::Serialize;

use crate::ball::Ball;
use crate::certificate::{CertRange, Certificate, Verdict};
use crate::error::{Error, Result};

/// Threshold from which the explicit bounds are claimed.
pub const N0: u64 = 100_000;

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
}

/// (P_d(x), P_{d-1}(x))
fn legendre_pair(d: usize, x: &Float) -> (Float, Float) {
    let prec = x.prec();
    let mut p0 = Float::with_val(prec, 1);
    let mut p1 = x.clone();
    for k in 1..d {
        let k = k as u32;
        let mut next = Float::with_val(prec, x * &p1);
        next *= 2 * k + 1;
        next -= Float::with_val(prec, &p0 * k);
        next /= k + 1;
        p0 = std::mem::replace(&mut p1, next);
    }
    (p1, p0)
}

fn legendre_derivative(d: usize, x: &Float, pd: &Float, pd1: &Float) -> Float {
    let prec = x.prec();
    let num = Float::with_val(prec, x * pd) - pd1;
    let den = Float::with_val(prec, x * x) - 1u32;
    num * d as u32 / den
}

fn compute_rule(d: usize, prec: u32) -> GaussLegendre {
    let work = prec + 32;
    let half = d.div_ceil(2);
    let roots: Vec<(Float, Float)> = (0..half)
        .into_par_iter()
        .map(|i| {
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (d as f64 + 0.5)).cos();
            let mut x = Float::with_val(64, guess);
            for _ in 0..100 {
                let (pd, pd1) = legendre_pair(d, &x);
                let dp = legendre_derivative(d, &x, &pd, &pd1);
                let dx = pd / dp;
                x -= &dx;
                if dx.is_zero() || dx.get_exp().unwrap_or(0) < -56 {
                    break;
                }
            }
            let mut p = 64u32;
            let mut steps_at_full = 0;
            loop {
                let (pd, pd1) = legendre_pair(d, &x);
                let dp = legendre_derivative(d, &x, &pd, &pd1);
                x -= pd / dp;
                if p >= work {
                    steps_at_full += 1;
                    if steps_at_full == 2 {
                        break;
                    }
                } else {
                    p = (p * 2).min(work);
                    x.set_prec(p);
                }
            }
            let (pd, pd1) = legendre_pair(d, &x);
            let dp = legendre_derivative(d, &x, &pd, &pd1);
            let one_minus = Float::with_val(work, 1u32) - Float::with_val(work, &x * &x);
            let w = Float::with_val(work, 2u32) / (one_minus * Float::with_val(work, &dp * &dp));
            (x, w)
        })
        .collect();

    let mut nodes = Vec::with_capacity(d);
    let mut weights = Vec::with_capacity(d);
    for (x, w) in roots.iter() {
        nodes.push(Float::with_val(work, -x));
        weights.push(w.clone());
    }
    let mirrored = if d % 2 == 1 { half - 1 } else { half };
    for (x, w) in roots.iter().take(mirrored).rev() {
        nodes.push(x.clone());
        weights.push(w.clone());
    }
    if d % 2 == 1 {
        // the middle root is 0; keep the sign clean
        nodes[half - 1] = Float::with_val(work, 0);
    }
    GaussLegendre { nodes, weights }
}

type RuleCache = Mutex<HashMap<(usize, u32), Arc<GaussLegendre>>>;

/// Cached Gauss-Legendre rule with `degree` nodes at `prec` bits.
pub fn gauss_legendre(degree: usize, prec: u32) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(rule) = cache.lock().expect("rule cache").get(&(degree, prec)) {
        return rule.clone();
    }
    let rule = Arc::new(compute_rule(degree, prec));
    cache
        .lock()
        .expect("rule cache")
        .insert((degree, prec), rule.clone());
    rule
}

/// Working precision for n: enough to resolve e^{pi sqrt(n/3)} against
/// e^{2 pi sqrt(n/3)} with margin.
pub fn k1_precision(n: u64, requested: u32) -> u32 {
    let bits = 1.5 * std::f64::consts::PI * (n as f64 / 3.0).sqrt() / std::f64::consts::LN_2 + 128.0;
    requested.max(bits.ceil() as u32)
}

struct K1Setup {
    prec: u32,
    a: Ball,
    c: Ball,
    inv_sqrt6: Ball,
    half_pi: Ball,
}

impl K1Setup {
    fn new(n: u64, prec: u32) -> Result<Self> {
        let root = Ball::from_i64(24 * n as i64 + 1, prec).sqrt()?;
        let a = Ball::pi(prec)
            .mul(&root)
            .div(&Ball::from_i64(18, prec).sqrt()?)?;
        let c = a.recip()?;
        Ok(Self {
            prec,
            c,
            a,
            inv_sqrt6: Ball::from_i64(6, prec).sqrt()?.recip()?,
            half_pi: Ball::pi(prec).mul_2si(-1),
        })
    }

    /// (main, secondary) integrands at theta, including the dx = cos dt factor.
    fn integrands(&self, theta: &Ball) -> Result<(Ball, Ball)> {
        let (s, co) = (theta.sin(), theta.cos());
        let arg = self
            .half_pi
            .mul(&s.mul(&self.inv_sqrt6).add(&Ball::ratio(1, 2, self.prec)));
        let cot = arg.cot()?.mul(&co);
        let ac = self.a.mul(&co);
        let main = cot.mul(&co.sub(&self.c)).mul(&ac.exp()?);
        let second = cot.mul(&co.add(&self.c)).mul(&ac.neg().exp()?);
        Ok((main, second))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Region {
    Inner,
    Outer,
}

struct Panel {
    lo: Float,
    hi: Float,
    region: Region,
}

fn panels(setup: &K1Setup, n: u64) -> Vec<Panel> {
    let prec = setup.prec;
    let half_pi = Float::with_val(prec, rug::float::Constant::Pi) / 2u32;
    // |x| <= n^{-1/8}  <=>  |t| <= asin(n^{-1/8})
    let split = Float::with_val(prec, n).root(8).recip().asin();
    let sigma = Float::with_val(prec, setup.a.mid()).sqrt().recip();
    let width = sigma.to_f64() / 4.0;

    let mut out = Vec::new();
    let mut cut = |lo: Float, hi: Float, region: Region| {
        let len = Float::with_val(prec, &hi - &lo);
        let count = ((len.to_f64() / width).ceil() as usize).max(1);
        for i in 0..count {
            let a = Float::with_val(prec, &len * i as u32) / count as u32 + &lo;
            let b = Float::with_val(prec, &len * (i as u32 + 1)) / count as u32 + &lo;
            out.push(Panel { lo: a, hi: b, region });
        }
    };
    cut(Float::with_val(prec, -&half_pi), Float::with_val(prec, -&split), Region::Outer);
    cut(Float::with_val(prec, -&split), split.clone(), Region::Inner);
    cut(split, half_pi, Region::Outer);
    out
}

#[derive(Clone, Debug)]
struct PanelSums {
    inner: Ball,
    outer: Ball,
    secondary: Ball,
}

fn integrate(setup: &K1Setup, panels: &[Panel], degree: usize) -> Result<PanelSums> {
    let prec = setup.prec;
    let rule = gauss_legendre(degree, prec);
    let per_panel: Vec<Result<(Region, Ball, Ball)>> = panels
        .par_iter()
        .map(|p| {
            let mid = Float::with_val(prec, &p.lo + &p.hi) / 2u32;
            let half = Float::with_val(prec, &p.hi - &p.lo) / 2u32;
            let mut main = Ball::zero(prec);
            let mut second = Ball::zero(prec);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let theta = Ball::exact(Float::with_val(prec, &half * x) + &mid);
                let (f, g) = setup.integrands(&theta)?;
                let wb = Ball::exact(Float::with_val(prec, w * &half));
                main = main.add(&f.mul(&wb));
                second = second.add(&g.mul(&wb));
            }
            Ok((p.region, main, second))
        })
        .collect();
    let mut sums = PanelSums {
        inner: Ball::zero(prec),
        outer: Ball::zero(prec),
        secondary: Ball::zero(prec),
    };
    for r in per_panel {
        let (region, main, second) = r?;
        match region {
            Region::Inner => sums.inner = sums.inner.add(&main),
            Region::Outer => sums.outer = sums.outer.add(&main),
        }
        sums.secondary = sums.secondary.add(&second);
    }
    Ok(sums)
}

/// Contributions of the two x-ranges and of the e^{-...} term.
#[derive(Clone, Debug)]
pub struct SplitReport {
    /// |x| <= n^{-1/8}
    pub inner: Ball,
    /// n^{-1/8} <= |x| <= 1, computed
    pub outer: Ball,
    /// 14 e^{2 pi sqrt(n/3) - pi n^{1/4}/sqrt3} / (24n+1)
    pub outer_bound: Ball,
    pub outer_within_bound: bool,
    /// The e^{-...} companion term, computed.
    pub secondary: Ball,
    /// 0.1, the bound claimed for n >= n0.
    pub secondary_bound: Ball,
    pub secondary_within_bound: bool,
}

#[derive(Clone, Debug)]
pub struct K1Evaluation {
    pub n: u64,
    pub value: Ball,
    pub quadrature_degree: usize,
    pub precision: u32,
    /// |value(degree) - value(degree/2)| plus the ball radius; empirical.
    pub error_budget: Float,
    pub panels: usize,
    pub split_report: SplitReport,
}

/// The k = 1 term at n, with Gauss-Legendre rules of `degree / 2`, `degree`
/// and `2 degree` nodes per panel; the value comes from `2 degree`.
pub fn k1_term(n: u64, degree: usize, precision: u32) -> Result<K1Evaluation> {
    if n == 0 {
        return Err(Error::InvalidArgument("k1_term needs n >= 1".into()));
    }
    if degree < 16 {
        return Err(Error::InvalidArgument(format!("quadrature degree {degree} < 16")));
    }
    let prec = k1_precision(n, precision);
    let setup = K1Setup::new(n, prec)?;
    let panels = panels(&setup, n);
    let coarse = integrate(&setup, &panels, degree / 2)?;
    let mid = integrate(&setup, &panels, degree)?;
    let fine = integrate(&setup, &panels, 2 * degree)?;

    let norm = Ball::from_i64(24 * n as i64 + 1, prec);
    let total = |s: &PanelSums| -> Result<Ball> {
        s.inner.add(&s.outer).add(&s.secondary).div(&norm)
    };
    let (v0, v1, v2) = (total(&coarse)?, total(&mid)?, total(&fine)?);
    let d1 = Float::with_val(prec, v1.mid() - v0.mid()).abs();
    let d2 = Float::with_val(prec, v2.mid() - v1.mid()).abs();
    let noise = Float::with_val(prec, v2.mid().abs_ref()) >> (prec / 2);
    if d2 > d1 && d2 > noise {
        return Err(Error::NonConvergence(format!(
            "k1 quadrature at n={n}: difference grew from {} to {} when doubling degree {degree}",
            d1.to_f64(),
            d2.to_f64()
        )));
    }
    let error_budget = Float::with_val_round(64, &d2 + v2.rad(), rug::float::Round::Up).0;

    let inner = fine.inner.div(&norm)?;
    let outer = fine.outer.div(&norm)?;
    let secondary = fine.secondary.div(&norm)?;
    let outer_bound = outer_region_bound(n, prec)?;
    let secondary_bound = Ball::ratio(1, 10, prec);
    let split_report = SplitReport {
        outer_within_bound: outer.abs().definitely_le(&outer_bound),
        secondary_within_bound: secondary.abs().definitely_le(&secondary_bound),
        inner,
        outer,
        outer_bound,
        secondary,
        secondary_bound,
    };
    Ok(K1Evaluation {
        n,
        value: v2,
        quadrature_degree: 2 * degree,
        precision: prec,
        error_budget,
        panels: panels.len(),
        split_report,
    })
}

/// e^{2 pi sqrt(n/3)}
pub fn main_exponential(n: u64, prec: u32) -> Result<Ball> {
    Ball::pi(prec)
        .mul_i64(2)
        .mul(&Ball::from_i64(n as i64, prec).div_i64(3)?.sqrt()?)
        .exp()
}

/// e^{pi sqrt(n/3)}
pub fn half_exponential(n: u64, prec: u32) -> Result<Ball> {
    Ball::pi(prec)
        .mul(&Ball::from_i64(n as i64, prec).div_i64(3)?.sqrt()?)
        .exp()
}

/// 14 e^{2 pi sqrt(n/3) - pi n^{1/4}/sqrt3} / (24n+1)
pub fn outer_region_bound(n: u64, prec: u32) -> Result<Ball> {
    let nb = Ball::from_i64(n as i64, prec);
    let quarter = nb.sqrt()?.sqrt()?;
    let shift = Ball::pi(prec).mul(&quarter).div(&Ball::from_i64(3, prec).sqrt()?)?;
    let e = main_exponential(n, prec)?.mul(&shift.neg().exp()?);
    e.mul_i64(14).div_i64(24 * n as i64 + 1)
}

/// Envelope for the terms k >= 2 and its two components.
#[derive(Clone, Debug)]
pub struct TailBudget {
    pub n: u64,
    /// e^{pi sqrt(n/3)}
    pub bound: Ball,
    /// (pi^2/18) sum_{k>=2} (log k + 14)/k^{3/2}, enclosed.
    pub constant_series: Ball,
    /// The value claimed for `constant_series`.
    pub constant_series_claim: Ball,
    /// (8/(pi(24n+1))) z^{3/2} (log z + 14) e^{z/2}, z = pi sqrt(24n+1)/(3 sqrt2).
    pub exponential_part: Ball,
    /// exponential_part / e^{pi sqrt(n/3)}, claimed <= 0.9.
    pub exponential_ratio: Ball,
    /// constant_series + exponential_part <= bound, using the enclosure of
    /// the series rather than the claimed constant.
    pub envelope_holds: bool,
}

/// Number of exact terms before the integral tail enclosure.
pub const SERIES_TERMS: u64 = 10_000;

/// Encloses sum_{k>=2} (log k + 14)/k^{3/2}: exact partial sum to K, then
/// the tail between int_{K+1}^inf and int_K^inf of the decreasing summand,
/// int_X^inf (log x + 14) x^{-3/2} dx = 2 X^{-1/2} (log X + 16).
pub fn log_series_enclosure(terms: u64, prec: u32) -> Result<Ball> {
    let chunks: Vec<Result<Ball>> = (2..=terms)
        .collect::<Vec<_>>()
        .par_chunks(1000)
        .map(|ks| {
            let mut acc = Ball::zero(prec);
            for &k in ks {
                let kb = Ball::from_i64(k as i64, prec);
                let t = kb.ln()?.add_i64(14).div(&kb.mul(&kb.sqrt()?))?;
                acc = acc.add(&t);
            }
            Ok(acc)
        })
        .collect();
    let mut sum = Ball::zero(prec);
    for c in chunks {
        sum = sum.add(&c?);
    }
    let tail = |x: u64| -> Result<Ball> {
        let xb = Ball::from_i64(x as i64, prec);
        xb.ln()?.add_i64(16).mul_i64(2).div(&xb.sqrt()?)
    };
    let lo = tail(terms + 1)?;
    let hi = tail(terms)?;
    let tail_ball = Ball::with_radius(
        Float::with_val(prec, lo.mid() + hi.mid()) / 2u32,
        &Float::with_val_round(64, Float::with_val(prec, hi.upper() - lo.lower()) / 2u32, rug::float::Round::Up).0,
    );
    Ok(sum.add(&tail_ball))
}

pub fn tail_budget(n: u64, prec: u32) -> Result<TailBudget> {
    if n < N0 {
        return Err(Error::BelowThreshold { n, min: N0 });
    }
    let bound = half_exponential(n, prec)?;
    let pi = Ball::pi(prec);
    let constant_series = pi.sqr().div_i64(18)?.mul(&log_series_enclosure(SERIES_TERMS, prec)?);
    let norm = Ball::from_i64(24 * n as i64 + 1, prec);
    let z = pi.mul(&norm.sqrt()?).div(&Ball::from_i64(18, prec).sqrt()?)?;
    let exponential_part = z
        .mul(&z.sqrt()?)
        .mul(&z.ln()?.add_i64(14))
        .mul(&z.mul_2si(-1).exp()?)
        .mul_i64(8)
        .div(&pi.mul(&norm))?;
    let exponential_ratio = exponential_part.div(&bound)?;
    let envelope_holds = constant_series.add(&exponential_part).definitely_le(&bound);
    Ok(TailBudget {
        n,
        bound,
        constant_series,
        constant_series_claim: Ball::ratio(103, 10, prec),
        exponential_part,
        exponential_ratio,
        envelope_holds,
    })
}

impl TailBudget {
    pub fn constant_series_claim_holds(&self) -> bool {
        self.constant_series.definitely_le(&self.constant_series_claim)
    }

    pub fn exponential_claim_holds(&self) -> bool {
        self.exponential_ratio
            .definitely_le(&Ball::ratio(9, 10, self.bound.prec()))
    }

    /// One certificate per component plus the combined envelope.
    pub fn certificate(&self) -> Certificate {
        let prec = self.bound.prec();
        let mut cert = Certificate::new(
            "k_ge_2_tail_budget",
            CertRange::Point { at: self.n.to_string() },
            prec,
        );
        cert.datum("envelope", self.bound.to_decimal(20))
            .datum("constant_series", self.constant_series.to_decimal(12))
            .datum("constant_series_claim", "10.3")
            .datum("exponential_ratio", self.exponential_ratio.to_decimal(12))
            .datum("exponential_ratio_claim", "0.9");
        if !self.constant_series_claim_holds() {
            cert.fail(
                "constant_series",
                format!(
                    "(pi^2/18) sum_(k>=2) (log k + 14)/k^(3/2) = {} exceeds the claimed 10.3",
                    self.constant_series.mid_decimal(8)
                ),
            );
        }
        if !self.exponential_claim_holds() {
            cert.fail("exponential_ratio", "exceeds 0.9");
        }
        if self.envelope_holds {
            cert.note("the combined bound e^(pi sqrt(n/3)) holds with the computed series value");
        } else {
            cert.fail("envelope", "computed components exceed e^(pi sqrt(n/3))");
        }
        cert
    }
}

/// Lemma ingredients for the sum over r, at a single k.
pub fn check_rbound_ingredients(k: u64, samples: &[f64], prec: u32) -> Result<Certificate> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k = {k} < 2")));
    }
    let mut cert = Certificate::new(
        "cot_sum_ingredients",
        CertRange::Samples {
            count: samples.len() * 2 * k as usize,
            description: format!("k={k}, x samples in [-1,1], r=0..{}", 2 * k - 1),
        },
        prec,
    );
    let pi = Ball::pi(prec);
    let step = pi.div_i64(2 * k as i64)?;
    let inv_sqrt6 = Ball::from_i64(6, prec).sqrt()?.recip()?;
    let eps = |p: i64, q: i64| Ball::ratio(p, q, prec);
    for &x in samples {
        if !(-1.0..=1.0).contains(&x) {
            cert.fail(format!("x={x}"), "sample outside [-1, 1]");
            continue;
        }
        let xb = Ball::from_f64(x, prec);
        for r in 0..2 * k {
            let sample = format!("k={k} x={x} r={r}");
            // y = pi/(2k) (r + 1/2 - x/sqrt6)
            let y = step.mul(&Ball::from_i64(r as i64, prec).add(&eps(1, 2)).sub(&xb.mul(&inv_sqrt6)));
            let other = pi.sub(&y);
            let near = if y.definitely_le(&other) {
                y.clone()
            } else if other.definitely_le(&y) {
                other.clone()
            } else {
                // both candidates: the lower end of either
                Ball::exact(Float::with_val(prec, y.lower().min(&other.lower())))
            };
            if !near.is_positive() {
                cert.fail(sample, "cot argument outside (0, pi)");
                continue;
            }
            let cot = y.cot()?.abs();
            if !cot.definitely_le(&near.recip()?) {
                cert.fail(sample.clone(), "|cot y| > 1/min(y, pi - y)");
            }
            let floor = if r < k {
                step.mul(&Ball::from_i64(r as i64, prec).add(&eps(9, 100)))
            } else {
                step.mul(&Ball::from_i64(2 * k as i64 - r as i64, prec).sub(&eps(91, 100)))
            };
            if !floor.definitely_le(&near) {
                cert.fail(sample, "min(y, pi - y) below the 0.09 / 0.91 floor");
            }
        }
    }
    let mut harmonic = Ball::zero(prec);
    for r in 0..k {
        harmonic = harmonic.add(&Ball::from_i64(r as i64, prec).add(&eps(9, 100)).recip()?);
    }
    let rhs = Ball::from_i64(k as i64, prec).ln()?.add_i64(14);
    cert.datum("sum_r 1/(r+0.09)", harmonic.to_decimal(12))
        .datum("log k + 14", rhs.to_decimal(12));
    if !harmonic.definitely_le(&rhs) {
        cert.fail(format!("k={k}"), "sum_r 1/(r+0.09) > log k + 14");
    }
    Ok(cert)
}

/// Compares the k = 1 value with the exact count.
#[derive(Clone, Debug, Serialize)]
pub struct K1Report {
    pub n: u64,
    pub value: String,
    pub error_budget: String,
    pub quadrature_degree: usize,
    pub precision: u32,
    pub exact_u: String,
    pub residual: String,
    /// e^{pi sqrt(n/3)}
    pub tail_envelope: String,
    pub residual_over_envelope: String,
    pub inner: String,
    pub outer: String,
    pub outer_bound: String,
    pub secondary: String,
    pub verdict: Verdict,
}

/// |u(n) - k1| <= factor * e^{pi sqrt(n/3)}, with the quadrature error
/// budget added to the residual.
pub fn k1_report(eval: &K1Evaluation, u_n: &Integer, factor: u32) -> Result<K1Report> {
    let prec = eval.precision;
    let exact = Ball::from_integer(u_n, prec);
    let residual = exact.sub(&eval.value).abs();
    let budget = Ball::exact(Float::with_val(prec, &eval.error_budget));
    let envelope = half_exponential(eval.n, prec)?;
    let ratio = residual.add(&budget).div(&envelope)?;
    let limit = Ball::from_i64(factor as i64, prec);
    let verdict = if ratio.definitely_le(&limit) {
        Verdict::Verified
    } else if limit.definitely_lt(&ratio) {
        Verdict::Failed
    } else {
        Verdict::Inconclusive
    };
    let s = &eval.split_report;
    Ok(K1Report {
        n: eval.n,
        value: eval.value.mid_decimal(40),
        error_budget: eval.error_budget.to_string_radix(10, Some(6)),
        quadrature_degree: eval.quadrature_degree,
        precision: prec,
        exact_u: u_n.to_string(),
        residual: residual.mid_decimal(20),
        tail_envelope: envelope.mid_decimal(20),
        residual_over_envelope: ratio.mid_decimal(12),
        inner: s.inner.mid_decimal(30),
        outer: s.outer.mid_decimal(20),
        outer_bound: s.outer_bound.mid_decimal(20),
        secondary: s.secondary.mid_decimal(20),
        verdict,
    })
}
