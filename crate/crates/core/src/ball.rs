//! Midpoint-radius real arithmetic on top of MPFR.
//!
//! A [`Ball`] is a multiple-precision midpoint together with a low-precision,
//! upward-rounded radius. Every operation returns a ball that contains the
//! exact result whenever the inputs contain their exact values. MPFR rounds
//! correctly, so each result contributes at most half an ulp of rounding error
//! on top of the radius propagated from the inputs, and nothing when MPFR
//! reports the result as exact.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::float::{Constant, Round};
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

/// Working precision used when a caller does not ask for anything else.
pub const DEFAULT_PRECISION: u32 = 512;

/// Upper limit for automatic precision escalation.
pub const MAX_PRECISION: u32 = 1 << 15;

/// Precision of the radius. Radii are only ever rounded up.
const RAD_PREC: u32 = 64;

#[derive(Clone)]
pub struct Ball {
    mid: Float,
    rad: Float,
}

fn rad_zero() -> Float {
    Float::new(RAD_PREC)
}

fn rad_from(x: &Float) -> Float {
    Float::with_val_round(RAD_PREC, x.abs_ref(), Round::Up).0
}

fn rad_add(a: &Float, b: &Float) -> Float {
    Float::with_val_round(RAD_PREC, a + b, Round::Up).0
}

fn rad_mul(a: &Float, b: &Float) -> Float {
    Float::with_val_round(RAD_PREC, a * b, Round::Up).0
}

fn rad_div(num: &Float, den: &Float) -> Float {
    Float::with_val_round(RAD_PREC, num / den, Round::Up).0
}

/// Upper bound on the rounding error of a round-to-nearest result.
fn rounding_error(mid: &Float, ord: Ordering) -> Float {
    if ord == Ordering::Equal {
        return rad_zero();
    }
    match mid.get_exp() {
        Some(e) => Float::with_val(RAD_PREC, 1) << (e - mid.prec() as i32 - 1),
        // An inexact zero can only come from underflow.
        None => Float::with_val(RAD_PREC, 1) >> (1 << 28),
    }
}

impl Ball {
    /// A ball with the given midpoint and radius 0.
    pub fn exact(mid: Float) -> Ball {
        Ball {
            mid,
            rad: rad_zero(),
        }
    }

    /// A ball with an explicit radius; the radius is rounded up.
    pub fn with_radius(mid: Float, rad: &Float) -> Ball {
        Ball {
            mid,
            rad: rad_from(rad),
        }
    }

    fn rounded(mid: Float, ord: Ordering, propagated: Float) -> Ball {
        let err = rounding_error(&mid, ord);
        Ball {
            mid,
            rad: rad_add(&propagated, &err),
        }
    }

    pub fn zero(prec: u32) -> Ball {
        Ball::exact(Float::new(prec))
    }

    pub fn one(prec: u32) -> Ball {
        Ball::from_i64(1, prec)
    }

    pub fn from_i64(v: i64, prec: u32) -> Ball {
        let (mid, ord) = Float::with_val_round(prec, v, Round::Nearest);
        Ball::rounded(mid, ord, rad_zero())
    }

    pub fn from_f64(v: f64, prec: u32) -> Ball {
        let (mid, ord) = Float::with_val_round(prec, v, Round::Nearest);
        Ball::rounded(mid, ord, rad_zero())
    }

    pub fn from_integer(v: &Integer, prec: u32) -> Ball {
        let (mid, ord) = Float::with_val_round(prec, v, Round::Nearest);
        Ball::rounded(mid, ord, rad_zero())
    }

    pub fn from_rational(v: &Rational, prec: u32) -> Ball {
        let (mid, ord) = Float::with_val_round(prec, v, Round::Nearest);
        Ball::rounded(mid, ord, rad_zero())
    }

    /// p/q as a ball.
    pub fn ratio(p: i64, q: i64, prec: u32) -> Ball {
        Ball::from_rational(&Rational::from((p, q)), prec)
    }

    pub fn pi(prec: u32) -> Ball {
        let (mid, ord) = Float::with_val_round(prec, Constant::Pi, Round::Nearest);
        Ball::rounded(mid, ord, rad_zero())
    }

    pub fn mid(&self) -> &Float {
        &self.mid
    }

    pub fn rad(&self) -> &Float {
        &self.rad
    }

    pub fn prec(&self) -> u32 {
        self.mid.prec()
    }

    /// Same value, midpoint rounded to `prec` bits.
    pub fn with_prec(&self, prec: u32) -> Ball {
        let (mid, ord) = Float::with_val_round(prec, &self.mid, Round::Nearest);
        Ball::rounded(mid, ord, self.rad.clone())
    }

    pub fn lower(&self) -> Float {
        Float::with_val_round(self.prec(), &self.mid - &self.rad, Round::Down).0
    }

    pub fn upper(&self) -> Float {
        Float::with_val_round(self.prec(), &self.mid + &self.rad, Round::Up).0
    }

    /// Upper bound on |x| over the ball.
    pub fn abs_upper(&self) -> Float {
        let abs = Float::with_val(self.prec(), self.mid.abs_ref());
        Float::with_val_round(self.prec(), &abs + &self.rad, Round::Up).0
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn contains_zero(&self) -> bool {
        self.lower() <= 0 && self.upper() >= 0
    }

    pub fn is_positive(&self) -> bool {
        self.lower() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.upper() < 0
    }

    pub fn is_nonnegative(&self) -> bool {
        self.lower() >= 0
    }

    /// `Some` when the sign is decided by the enclosure.
    pub fn sign(&self) -> Option<Ordering> {
        if self.is_exact() && self.mid.is_zero() {
            Some(Ordering::Equal)
        } else if self.is_positive() {
            Some(Ordering::Greater)
        } else if self.is_negative() {
            Some(Ordering::Less)
        } else {
            None
        }
    }

    /// Every point of `self` is <= every point of `other`.
    pub fn definitely_le(&self, other: &Ball) -> bool {
        self.upper() <= other.lower()
    }

    pub fn definitely_lt(&self, other: &Ball) -> bool {
        self.upper() < other.lower()
    }

    pub fn contains_float(&self, x: &Float) -> bool {
        self.lower() <= *x && *x <= self.upper()
    }

    pub fn contains_rational(&self, x: &Rational) -> bool {
        self.lower() <= *x && *x <= self.upper()
    }

    /// `other` lies entirely inside `self`.
    pub fn contains_ball(&self, other: &Ball) -> bool {
        self.lower() <= other.lower() && other.upper() <= self.upper()
    }

    pub fn overlaps(&self, other: &Ball) -> bool {
        self.lower() <= other.upper() && other.lower() <= self.upper()
    }

    pub fn neg(&self) -> Ball {
        Ball {
            mid: Float::with_val(self.prec(), -&self.mid),
            rad: self.rad.clone(),
        }
    }

    pub fn abs(&self) -> Ball {
        Ball {
            mid: Float::with_val(self.prec(), self.mid.abs_ref()),
            rad: self.rad.clone(),
        }
    }

    pub fn add(&self, other: &Ball) -> Ball {
        let prec = self.prec().max(other.prec());
        let (mid, ord) = Float::with_val_round(prec, &self.mid + &other.mid, Round::Nearest);
        Ball::rounded(mid, ord, rad_add(&self.rad, &other.rad))
    }

    pub fn sub(&self, other: &Ball) -> Ball {
        let prec = self.prec().max(other.prec());
        let (mid, ord) = Float::with_val_round(prec, &self.mid - &other.mid, Round::Nearest);
        Ball::rounded(mid, ord, rad_add(&self.rad, &other.rad))
    }

    pub fn mul(&self, other: &Ball) -> Ball {
        let prec = self.prec().max(other.prec());
        let (mid, ord) = Float::with_val_round(prec, &self.mid * &other.mid, Round::Nearest);
        let a = rad_from(&self.mid);
        let b = rad_from(&other.mid);
        let prop = rad_add(
            &rad_add(&rad_mul(&a, &other.rad), &rad_mul(&b, &self.rad)),
            &rad_mul(&self.rad, &other.rad),
        );
        Ball::rounded(mid, ord, prop)
    }

    pub fn div(&self, other: &Ball) -> Result<Ball> {
        let b_abs_down = Float::with_val_round(RAD_PREC, other.mid.abs_ref(), Round::Down).0;
        let gap = Float::with_val_round(RAD_PREC, &b_abs_down - &other.rad, Round::Down).0;
        if gap <= 0 {
            return Err(Error::DivisionByZero);
        }
        let prec = self.prec().max(other.prec());
        let (mid, ord) = Float::with_val_round(prec, &self.mid / &other.mid, Round::Nearest);
        let num = rad_add(
            &rad_mul(&rad_from(&self.mid), &other.rad),
            &rad_mul(&rad_from(&other.mid), &self.rad),
        );
        let den = Float::with_val_round(RAD_PREC, &b_abs_down * &gap, Round::Down).0;
        Ok(Ball::rounded(mid, ord, rad_div(&num, &den)))
    }

    pub fn recip(&self) -> Result<Ball> {
        Ball::one(self.prec()).div(self)
    }

    pub fn sqr(&self) -> Ball {
        self.mul(self)
    }

    pub fn powi(&self, k: u32) -> Ball {
        let mut result = Ball::one(self.prec());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.sqr();
            }
        }
        result
    }

    /// Exact multiplication by 2^k.
    pub fn mul_2si(&self, k: i32) -> Ball {
        Ball {
            mid: Float::with_val(self.prec(), &self.mid << k),
            rad: Float::with_val(RAD_PREC, &self.rad << k),
        }
    }

    pub fn add_i64(&self, v: i64) -> Ball {
        self.add(&Ball::from_i64(v, self.prec()))
    }

    pub fn mul_i64(&self, v: i64) -> Ball {
        self.mul(&Ball::from_i64(v, self.prec()))
    }

    pub fn mul_rational(&self, v: &Rational) -> Ball {
        self.mul(&Ball::from_rational(v, self.prec()))
    }

    pub fn div_i64(&self, v: i64) -> Result<Ball> {
        self.div(&Ball::from_i64(v, self.prec()))
    }

    pub fn exp(&self) -> Result<Ball> {
        let (mid, ord) = Float::with_val_round(self.prec(), self.mid.exp_ref(), Round::Nearest);
        if !mid.is_finite() {
            return Err(Error::Overflow("exp"));
        }
        let err = rounding_error(&mid, ord);
        let growth = Float::with_val_round(RAD_PREC, self.rad.exp_m1_ref(), Round::Up).0;
        if !growth.is_finite() {
            return Err(Error::Overflow("exp radius"));
        }
        let bound = rad_add(&rad_from(&mid), &err);
        let rad = rad_add(&rad_mul(&bound, &growth), &err);
        Ok(Ball { mid, rad })
    }

    pub fn ln(&self) -> Result<Ball> {
        let lo = self.lower();
        if lo <= 0 {
            return Err(self.domain("log"));
        }
        let (mid, ord) = Float::with_val_round(self.prec(), self.mid.ln_ref(), Round::Nearest);
        let lo_down = Float::with_val_round(RAD_PREC, &lo, Round::Down).0;
        if lo_down <= 0 {
            return Err(self.domain("log"));
        }
        Ok(Ball::rounded(mid, ord, rad_div(&self.rad, &lo_down)))
    }

    pub fn sqrt(&self) -> Result<Ball> {
        if self.lower() < 0 {
            return Err(self.domain("sqrt"));
        }
        if self.mid.is_zero() {
            // Only reachable with radius 0 since lower >= 0.
            return Ok(Ball::zero(self.prec()));
        }
        let (mid, ord) = Float::with_val_round(self.prec(), self.mid.sqrt_ref(), Round::Nearest);
        let root_down = Float::with_val_round(RAD_PREC, self.mid.sqrt_ref(), Round::Down).0;
        Ok(Ball::rounded(mid, ord, rad_div(&self.rad, &root_down)))
    }

    pub fn sin(&self) -> Ball {
        let (mid, ord) = Float::with_val_round(self.prec(), self.mid.sin_ref(), Round::Nearest);
        Ball::rounded(mid, ord, self.rad.clone())
    }

    pub fn cos(&self) -> Ball {
        let (mid, ord) = Float::with_val_round(self.prec(), self.mid.cos_ref(), Round::Nearest);
        Ball::rounded(mid, ord, self.rad.clone())
    }

    /// cos/sin; fails when the sine ball contains zero.
    pub fn cot(&self) -> Result<Ball> {
        self.cos().div(&self.sin()).map_err(|_| self.domain("cot"))
    }

    /// x^y = exp(y log x) for x > 0.
    pub fn pow(&self, y: &Ball) -> Result<Ball> {
        self.ln()?.mul(y).exp()
    }

    pub fn pow_ratio(&self, p: i64, q: i64) -> Result<Ball> {
        self.pow(&Ball::ratio(p, q, self.prec()))
    }

    /// Complementary error function.
    pub fn erfc(&self) -> Ball {
        let (mid, ord) = Float::with_val_round(self.prec(), self.mid.erfc_ref(), Round::Nearest);
        // |erfc'(x)| = 2/sqrt(pi) exp(-x^2) <= 1.13 exp(-d^2), d = distance of the ball to 0
        let lo = Float::with_val_round(RAD_PREC, &self.mid - &self.rad, Round::Down).0;
        let hi = Float::with_val_round(RAD_PREC, &self.mid + &self.rad, Round::Up).0;
        let d = if lo > 0 {
            lo
        } else if hi < 0 {
            Float::with_val(RAD_PREC, -&hi)
        } else {
            rad_zero()
        };
        let d2 = Float::with_val_round(RAD_PREC, d.square_ref(), Round::Down).0;
        let decay = Float::with_val_round(RAD_PREC, (-d2).exp_ref(), Round::Up).0;
        let lip = rad_mul(&Float::with_val_round(RAD_PREC, 1.13, Round::Up).0, &decay);
        Ball::rounded(mid, ord, rad_mul(&lip, &self.rad))
    }

    pub fn max_upper(a: &Ball, b: &Ball) -> Ball {
        if a.upper() >= b.upper() {
            a.clone()
        } else {
            b.clone()
        }
    }

    fn domain(&self, function: &'static str) -> Error {
        Error::Domain {
            function,
            value: self.to_decimal(12),
        }
    }

    /// Midpoint with `digits` significant decimal digits followed by the radius.
    pub fn to_decimal(&self, digits: usize) -> String {
        format!(
            "{} +/- {}",
            self.mid.to_string_radix(10, Some(digits)),
            self.rad.to_string_radix(10, Some(3))
        )
    }

    /// Midpoint only, with `digits` significant digits.
    /// Positional notation when the exponent is small, scientific otherwise.
    pub fn mid_decimal(&self, digits: usize) -> String {
        plain_decimal(&self.mid.to_string_radix(10, Some(digits)))
    }
}

/// Rewrites MPFR output such as `5.483e-2` as `0.05483`.
pub(crate) fn plain_decimal(sci: &str) -> String {
    let (mantissa, exp) = match sci.split_once('e') {
        Some((m, e)) => (m, e.parse::<i64>().unwrap_or(0)),
        None => (sci, 0),
    };
    if !(-20..=20).contains(&exp) || mantissa.contains(['@', 'n', 'i']) {
        return sci.to_string();
    }
    let (sign, body) = match mantissa.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", mantissa),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    let digits = format!("{int_part}{frac_part}");
    let point = int_part.len() as i64 + exp;
    let out = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (a, b) = digits.split_at(point as usize);
        format!("{a}.{b}")
    };
    format!("{sign}{out}")
}

impl fmt::Debug for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ball({})", self.to_decimal(20))
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(20))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Ball> for &Ball {
            type Output = Ball;
            fn $method(self, rhs: &Ball) -> Ball {
                Ball::$method(self, rhs)
            }
        }
        impl $trait<Ball> for Ball {
            type Output = Ball;
            fn $method(self, rhs: Ball) -> Ball {
                Ball::$method(&self, &rhs)
            }
        }
        impl $trait<&Ball> for Ball {
            type Output = Ball;
            fn $method(self, rhs: &Ball) -> Ball {
                Ball::$method(&self, rhs)
            }
        }
        impl $trait<Ball> for &Ball {
            type Output = Ball;
            fn $method(self, rhs: Ball) -> Ball {
                Ball::$method(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for &Ball {
    type Output = Ball;
    fn neg(self) -> Ball {
        Ball::neg(self)
    }
}

impl Neg for Ball {
    type Output = Ball;
    fn neg(self) -> Ball {
        Ball::neg(&self)
    }
}

/// Result of evaluating an expression with automatic precision doubling.
#[derive(Clone, Debug)]
pub struct Escalation<T> {
    pub value: T,
    pub precision: u32,
    pub decided: bool,
}

/// Evaluates `eval` at `start` bits, doubling the precision until `decided`
/// accepts the result or `max` is exceeded.
pub fn escalate<T>(
    start: u32,
    max: u32,
    mut eval: impl FnMut(u32) -> Result<T>,
    mut decided: impl FnMut(&T) -> bool,
) -> Result<Escalation<T>> {
    let mut prec = start.max(64);
    loop {
        let value = eval(prec)?;
        if decided(&value) {
            return Ok(Escalation {
                value,
                precision: prec,
                decided: true,
            });
        }
        if prec.saturating_mul(2) > max {
            return Ok(Escalation {
                value,
                precision: prec,
                decided: false,
            });
        }
        prec *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 256;

    #[test]
    fn add_exact_values() {
        let s = Ball::from_i64(1, P) + Ball::from_i64(2, P);
        assert!(s.contains_rational(&Rational::from(3)));
        assert!(s.rad() < &1e-70);
    }

    #[test]
    fn multiply_by_exact_zero_annihilates() {
        let x = Ball::with_radius(Float::with_val(P, 3.5), &Float::with_val(64, 1e-3));
        let z = x.mul(&Ball::zero(P));
        assert!(z.mid().is_zero());
        assert!(z.rad() < &1e-70);
    }

    #[test]
    fn one_third_is_contained() {
        let q = Ball::one(P).div(&Ball::from_i64(3, P)).unwrap();
        assert!(q.contains_rational(&Rational::from((1, 3))));
        assert!(!q.is_exact());
    }

    #[test]
    fn division_by_ball_containing_zero_fails() {
        let z = Ball::with_radius(Float::with_val(P, 0.1), &Float::with_val(64, 0.2));
        assert!(matches!(Ball::one(P).div(&z), Err(Error::DivisionByZero)));
    }

    #[test]
    fn exp_of_zero_is_one() {
        let e = Ball::zero(P).exp().unwrap();
        assert!(e.is_exact());
        assert_eq!(e.mid(), &1);
    }

    #[test]
    fn sqrt_of_pi_squared_contains_pi() {
        let pi = Ball::pi(P);
        let back = pi.sqr().sqrt().unwrap();
        assert!(back.overlaps(&pi));
        let pi_hi = Float::with_val(1024, Constant::Pi);
        assert!(back.contains_float(&pi_hi));
    }

    #[test]
    fn cot_at_quarter_pi_is_one() {
        let c = Ball::pi(P).div_i64(4).unwrap().cot().unwrap();
        assert!(c.contains_rational(&Rational::from(1)));
    }

    #[test]
    fn domain_errors() {
        assert!(Ball::from_i64(-1, P).ln().is_err());
        assert!(Ball::from_i64(-1, P).sqrt().is_err());
        assert!(Ball::zero(P).cot().is_err());
    }

    #[test]
    fn large_exponent_stays_finite() {
        // e^{2 pi sqrt(n/3)} at n = 10^5 is about 10^498
        let x = Ball::from_i64(1147, DEFAULT_PRECISION).exp().unwrap();
        assert!(x.mid().is_finite());
        assert!(x.rad().is_finite());
        let digits = x.mid().get_exp().unwrap() as f64 * std::f64::consts::LOG10_2;
        assert!((497.0..500.0).contains(&digits));
    }

    #[test]
    fn erfc_matches_known_value() {
        // erfc(1) = 0.157299207050285130658779364917...
        let e = Ball::one(P).erfc();
        assert!((e.to_f64() - 0.157_299_207_050_285_13).abs() < 1e-15);
    }

    #[test]
    fn plain_decimals() {
        assert_eq!(plain_decimal("5.4836e-2"), "0.054836");
        assert_eq!(plain_decimal("-1.25e1"), "-12.5");
        assert_eq!(plain_decimal("3.00e2"), "300");
        assert_eq!(plain_decimal("1.5"), "1.5");
        assert_eq!(plain_decimal("1.0e498"), "1.0e498");
    }

    #[test]
    fn escalation_doubles_until_decided() {
        let out = escalate(
            64,
            4096,
            Ok,
            |p| *p >= 1000,
        )
        .unwrap();
        assert_eq!(out.precision, 1024);
        assert!(out.decided);
    }
}
