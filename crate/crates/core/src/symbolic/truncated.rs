//! Truncated power series with exact coefficients.

use rug::{Integer, Rational};
use serde::Serialize;

use super::constant::AlgebraicConstant;
use crate::ball::Ball;
use crate::error::Result;

/// The expansion variable of a [`TruncatedAsymptoticSeries`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SeriesVar {
    /// s = n^{-1/2}
    S,
    /// 1/lambda_n
    LambdaInv,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RemainderBound {
    /// No remainder: the series is a polynomial.
    Exact,
    /// |remainder| <= c * var^order
    Bounded(Rational),
    /// Order known, constant not established.
    Unverified,
}

/// `sum_{k < order} coeffs[k] var^k + O(var^order)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedAsymptoticSeries {
    var: SeriesVar,
    coeffs: Vec<AlgebraicConstant>,
    /// `None` for an exact polynomial.
    order: Option<usize>,
    bound: RemainderBound,
}

impl TruncatedAsymptoticSeries {
    pub fn new(var: SeriesVar, mut coeffs: Vec<AlgebraicConstant>, order: usize) -> Self {
        coeffs.truncate(order);
        Self {
            var,
            coeffs,
            order: Some(order),
            bound: RemainderBound::Unverified,
        }
    }

    pub fn exact(var: SeriesVar, coeffs: Vec<AlgebraicConstant>) -> Self {
        Self {
            var,
            coeffs,
            order: None,
            bound: RemainderBound::Exact,
        }
    }

    pub fn constant(var: SeriesVar, c: AlgebraicConstant) -> Self {
        Self::exact(var, vec![c])
    }

    /// Attaches an explicit remainder constant.
    pub fn with_bound(mut self, c: Rational) -> Self {
        if self.order.is_some() {
            self.bound = RemainderBound::Bounded(c);
        }
        self
    }

    pub fn var(&self) -> SeriesVar {
        self.var
    }

    pub fn order(&self) -> Option<usize> {
        self.order
    }

    pub fn bound(&self) -> &RemainderBound {
        &self.bound
    }

    pub fn coeff(&self, k: usize) -> AlgebraicConstant {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    /// Coefficients below the truncation order.
    pub fn coeffs(&self) -> &[AlgebraicConstant] {
        &self.coeffs
    }

    /// Exponent of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    fn effective_valuation(&self) -> usize {
        self.valuation().or(self.order).unwrap_or(usize::MAX)
    }

    pub fn truncate(&self, order: usize) -> Self {
        match self.order {
            Some(o) if o <= order => self.clone(),
            _ => {
                let mut out = Self::new(self.var, self.coeffs.clone(), order);
                if let RemainderBound::Bounded(_) = self.bound {
                    out.bound = RemainderBound::Unverified;
                }
                out
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.var, other.var, "series in different variables");
        let order = match (self.order, other.order) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let len = self.coeffs.len().max(other.coeffs.len());
        let len = order.map_or(len, |o| len.min(o));
        let coeffs = (0..len).map(|k| &self.coeff(k) + &other.coeff(k)).collect();
        let bound = match (&self.bound, &other.bound) {
            (RemainderBound::Exact, RemainderBound::Exact) => RemainderBound::Exact,
            (RemainderBound::Exact, b) | (b, RemainderBound::Exact) => b.clone(),
            (RemainderBound::Bounded(a), RemainderBound::Bounded(b))
                if self.order == other.order =>
            {
                RemainderBound::Bounded(Rational::from(a + b))
            }
            _ => RemainderBound::Unverified,
        };
        Self {
            var: self.var,
            coeffs,
            order,
            bound,
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&AlgebraicConstant::rational(-1))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.var, other.var, "series in different variables");
        let va = self.effective_valuation();
        let vb = other.effective_valuation();
        let order = match (self.order, other.order) {
            (None, None) => None,
            (Some(a), None) => Some(a.saturating_add(vb)),
            (None, Some(b)) => Some(b.saturating_add(va)),
            (Some(a), Some(b)) => Some(a.saturating_add(vb).min(b.saturating_add(va))),
        };
        let full = (self.coeffs.len() + other.coeffs.len()).saturating_sub(1);
        let len = order.map_or(full, |o| full.min(o));
        let mut coeffs = vec![AlgebraicConstant::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                coeffs[i + j] = &coeffs[i + j] + &(a * b);
            }
        }
        let bound = match (&self.bound, &other.bound) {
            (RemainderBound::Exact, RemainderBound::Exact) => RemainderBound::Exact,
            _ => RemainderBound::Unverified,
        };
        Self {
            var: self.var,
            coeffs,
            order,
            bound,
        }
    }

    pub fn scale(&self, c: &AlgebraicConstant) -> Self {
        let bound = match &self.bound {
            RemainderBound::Bounded(b) => {
                let only_rational = c.terms().all(|(&(i, j), _)| i == 0 && j == 0);
                if only_rational {
                    RemainderBound::Bounded(b * c.coeff(0, 0).abs())
                } else {
                    RemainderBound::Unverified
                }
            }
            other => other.clone(),
        };
        Self {
            var: self.var,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
            order: self.order,
            bound,
        }
    }

    /// Multiplies by var^k.
    pub fn shift_up(&self, k: usize) -> Self {
        let mut coeffs = vec![AlgebraicConstant::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self {
            var: self.var,
            coeffs,
            order: self.order.map(|o| o + k),
            bound: self.bound.clone(),
        }
    }

    /// Divides by var^k; the first `k` coefficients must vanish.
    pub fn shift_down(&self, k: usize) -> Self {
        assert!(
            self.coeffs.iter().take(k).all(|c| c.is_zero()),
            "shift_down would discard nonzero terms"
        );
        Self {
            var: self.var,
            coeffs: self.coeffs.iter().skip(k).cloned().collect(),
            order: self.order.map(|o| o.saturating_sub(k)),
            bound: self.bound.clone(),
        }
    }

    /// exp of a series with vanishing constant term, truncated at `order`.
    pub fn exp(&self, order: usize) -> Self {
        assert!(self.coeff(0).is_zero(), "exp needs a zero constant term");
        let x = self.truncate(order);
        let mut result = Self::new(self.var, vec![AlgebraicConstant::one()], order);
        let mut power = Self::new(self.var, vec![AlgebraicConstant::one()], order);
        let mut factorial = Integer::from(1);
        for k in 1..order {
            power = power.mul(&x).truncate(order);
            factorial *= k as u32;
            result = result.add(&power.scale(&AlgebraicConstant::rational(Rational::from((
                Integer::from(1),
                factorial.clone(),
            )))));
        }
        result.truncate(order)
    }

    /// `sum_k poly[k] * self^k`, truncated at `order`. `self` must have
    /// positive valuation.
    pub fn substitute_into(&self, poly: &[AlgebraicConstant], order: usize) -> Self {
        assert!(self.coeff(0).is_zero(), "substitution needs a zero constant term");
        let mut result = Self::new(self.var, vec![], order);
        let mut power = Self::new(self.var, vec![AlgebraicConstant::one()], order);
        for (k, c) in poly.iter().enumerate() {
            if k > 0 {
                power = power.mul(self).truncate(order);
            }
            result = result.add(&power.scale(c));
        }
        result
    }

    /// `(1 + c var^step)^alpha` through `var^{order-1}`.
    pub fn binomial(
        var: SeriesVar,
        alpha: &Rational,
        c: &AlgebraicConstant,
        step: usize,
        order: usize,
    ) -> Self {
        let mut coeffs = vec![AlgebraicConstant::zero(); order];
        let mut k = 0;
        while k * step < order {
            coeffs[k * step] = c.pow(k as u32).scale(&binomial_coefficient(alpha, k as u32));
            k += 1;
        }
        Self::new(var, coeffs, order)
    }

    /// Value of the polynomial part at `x`.
    pub fn eval_at(&self, x: &Ball) -> Result<Ball> {
        let prec = x.prec();
        let mut acc = Ball::zero(prec);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(&c.eval(prec)?);
        }
        Ok(acc)
    }
}

/// alpha choose k for rational alpha.
pub fn binomial_coefficient(alpha: &Rational, k: u32) -> Rational {
    let mut out = Rational::from(1);
    for i in 0..k {
        out *= Rational::from(alpha - i);
        out /= i + 1;
    }
    out
}

/// Dense univariate series with rational coefficients, used for the Taylor
/// expansions of elementary functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalSeries(pub Vec<Rational>);

impl RationalSeries {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sin(order: usize) -> Self {
        Self::trig(order, 1)
    }

    pub fn cos(order: usize) -> Self {
        Self::trig(order, 0)
    }

    fn trig(order: usize, parity: usize) -> Self {
        let mut c = vec![Rational::new(); order];
        let mut fact = Integer::from(1);
        for (k, ck) in c.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as u32;
            }
            if k % 2 == parity {
                let sign = if (k / 2) % 2 == 0 { 1 } else { -1 };
                *ck = Rational::from((Integer::from(sign), fact.clone()));
            }
        }
        Self(c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.len().min(other.len());
        Self((0..n).map(|k| Rational::from(&self.0[k] + &other.0[k])).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.len().min(other.len());
        Self((0..n).map(|k| Rational::from(&self.0[k] - &other.0[k])).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.len().min(other.len());
        let mut out = vec![Rational::new(); n];
        for i in 0..n {
            for j in 0..n - i {
                out[i + j] += Rational::from(&self.0[i] * &other.0[j]);
            }
        }
        Self(out)
    }

    /// Multiplicative inverse; the constant term must be nonzero.
    pub fn recip(&self) -> Self {
        let n = self.len();
        assert!(n > 0 && self.0[0] != 0, "series is not invertible");
        let mut out = vec![Rational::new(); n];
        out[0] = Rational::from(1) / &self.0[0];
        for k in 1..n {
            let mut acc = Rational::new();
            for j in 1..=k {
                acc += Rational::from(&self.0[j] * &out[k - j]);
            }
            out[k] = -acc * &out[0];
        }
        Self(out)
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.recip())
    }
}
