//! Exact elements of Q[pi, 1/pi, t] / (t^4 - 3), where t stands for 3^{1/4}.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::ops::Pow;
use rug::Rational;

use crate::ball::Ball;
use crate::error::Result;

/// Finite sum of `c * pi^i * t^j` with `0 <= j <= 3`, zero coefficients removed.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AlgebraicConstant {
    terms: BTreeMap<(i32, u8), Rational>,
}

impl AlgebraicConstant {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::rational(Rational::from(1))
    }

    pub fn rational(q: impl Into<Rational>) -> Self {
        Self::monomial(q, 0, 0)
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Self::rational(Rational::from((p, q)))
    }

    /// `q * pi^pi_exp * 3^{t_exp/4}` for any integer `t_exp`.
    pub fn monomial(q: impl Into<Rational>, pi_exp: i32, t_exp: i32) -> Self {
        let mut q: Rational = q.into();
        let carry = t_exp.div_euclid(4);
        let j = t_exp.rem_euclid(4) as u8;
        if carry >= 0 {
            q *= Rational::from(rug::Integer::from(3).pow(carry as u32));
        } else {
            q /= Rational::from(rug::Integer::from(3).pow((-carry) as u32));
        }
        let mut out = Self::zero();
        out.add_term(pi_exp, j, q);
        out
    }

    pub fn pi_pow(k: i32) -> Self {
        Self::monomial(1, k, 0)
    }

    /// 3^{k/4}
    pub fn t_pow(k: i32) -> Self {
        Self::monomial(1, 0, k)
    }

    pub fn sqrt3() -> Self {
        Self::t_pow(2)
    }

    fn add_term(&mut self, i: i32, j: u8, q: Rational) {
        if q == 0 {
            return;
        }
        let entry = self.terms.entry((i, j)).or_default();
        *entry += q;
        if *entry == 0 {
            self.terms.remove(&(i, j));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Canonical terms `((pi exponent, t exponent), coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (&(i32, u8), &Rational)> {
        self.terms.iter()
    }

    /// Coefficient of `pi^i t^j` in canonical form.
    pub fn coeff(&self, pi_exp: i32, t_exp: u8) -> Rational {
        self.terms
            .get(&(pi_exp, t_exp))
            .cloned()
            .unwrap_or_default()
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if *q == 0 {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (*k, Rational::from(c * q)))
                .collect(),
        }
    }

    pub fn scale_ratio(&self, p: i64, q: i64) -> Self {
        self.scale(&Rational::from((p, q)))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Encloses the real value with pi and 3^{1/4} evaluated at `prec` bits.
    pub fn eval(&self, prec: u32) -> Result<Ball> {
        let pi = Ball::pi(prec);
        let t = Ball::from_i64(3, prec).sqrt()?.sqrt()?;
        let mut acc = Ball::zero(prec);
        for (&(i, j), c) in &self.terms {
            let mut term = Ball::from_rational(c, prec).mul(&t.powi(j as u32));
            let pk = pi.powi(i.unsigned_abs());
            term = if i >= 0 { term.mul(&pk) } else { term.div(&pk)? };
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Upper bound on the absolute value.
    pub fn abs_upper(&self, prec: u32) -> Result<Ball> {
        let v = self.eval(prec)?;
        Ok(Ball::exact(v.abs_upper()))
    }

    /// Machine-oriented canonical form, e.g. `1/24*pi^0*t^1`.
    pub fn to_canonical_string(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(&(i, j), c)| format!("({c})*pi^{i}*t^{j}"))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Writes `c * pi^i * 3^{j/4}` the way a person would, folding a `3^{-k/4}`
/// into the denominator when that shortens the rational coefficient.
fn render_monomial(i: i32, j: u8, c: &Rational) -> (bool, String) {
    let mut coeff = c.clone().abs();
    let mut t_exp = j as i32;
    if t_exp > 0 {
        let alt = Rational::from(&coeff * 3u32);
        if height(&alt) < height(&coeff) {
            coeff = alt;
            t_exp -= 4;
        }
    }
    let mut num: Vec<String> = Vec::new();
    let mut den: Vec<String> = Vec::new();
    if *coeff.numer() != 1 {
        num.push(coeff.numer().to_string());
    }
    if *coeff.denom() != 1 {
        den.push(coeff.denom().to_string());
    }
    let pi = |k: i32| if k == 1 { "pi".to_string() } else { format!("pi^{k}") };
    if i > 0 {
        num.push(pi(i));
    } else if i < 0 {
        den.push(pi(-i));
    }
    if t_exp > 0 {
        num.push(format!("3^({t_exp}/4)"));
    } else if t_exp < 0 {
        den.push(format!("3^({}/4)", -t_exp));
    }
    let numer = if num.is_empty() {
        "1".to_string()
    } else {
        num.join("*")
    };
    let body = match den.len() {
        0 => numer,
        1 => format!("{numer}/{}", den[0]),
        _ => format!("{numer}/({})", den.join("*")),
    };
    (*c < 0, body)
}

fn height(q: &Rational) -> rug::Integer {
    rug::Integer::from(q.numer().abs_ref()).max(q.denom().clone())
}

impl fmt::Display for AlgebraicConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // highest power of pi first
        for (k, (&(i, j), c)) in self.terms.iter().rev().enumerate() {
            let (negative, body) = render_monomial(i, j, c);
            match (k, negative) {
                (0, false) => write!(f, "{body}")?,
                (0, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, " + {body}")?,
                (_, true) => write!(f, " - {body}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for AlgebraicConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Add<&AlgebraicConstant> for &AlgebraicConstant {
    type Output = AlgebraicConstant;
    fn add(self, rhs: &AlgebraicConstant) -> AlgebraicConstant {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }
}

impl Sub<&AlgebraicConstant> for &AlgebraicConstant {
    type Output = AlgebraicConstant;
    fn sub(self, rhs: &AlgebraicConstant) -> AlgebraicConstant {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.add_term(i, j, Rational::from(-c));
        }
        out
    }
}

impl Mul<&AlgebraicConstant> for &AlgebraicConstant {
    type Output = AlgebraicConstant;
    fn mul(self, rhs: &AlgebraicConstant) -> AlgebraicConstant {
        let mut out = AlgebraicConstant::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &rhs.terms {
                let mut q = Rational::from(c1 * c2);
                let mut j = j1 + j2;
                if j >= 4 {
                    j -= 4;
                    q *= 3u32;
                }
                out.add_term(i1 + i2, j, q);
            }
        }
        out
    }
}

impl Neg for &AlgebraicConstant {
    type Output = AlgebraicConstant;
    fn neg(self) -> AlgebraicConstant {
        self.scale(&Rational::from(-1))
    }
}

macro_rules! owned_ops {
    ($($trait:ident $method:ident),*) => {$(
        impl $trait<AlgebraicConstant> for AlgebraicConstant {
            type Output = AlgebraicConstant;
            fn $method(self, rhs: AlgebraicConstant) -> AlgebraicConstant {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&AlgebraicConstant> for AlgebraicConstant {
            type Output = AlgebraicConstant;
            fn $method(self, rhs: &AlgebraicConstant) -> AlgebraicConstant {
                (&self).$method(rhs)
            }
        }
    )*};
}

owned_ops!(Add add, Sub sub, Mul mul);

impl Neg for AlgebraicConstant {
    type Output = AlgebraicConstant;
    fn neg(self) -> AlgebraicConstant {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t() -> AlgebraicConstant {
        AlgebraicConstant::t_pow(1)
    }

    #[test]
    fn t_to_the_fourth_is_three() {
        assert_eq!(t().pow(4), AlgebraicConstant::rational(3));
        assert_eq!(AlgebraicConstant::t_pow(4), AlgebraicConstant::rational(3));
        assert_eq!(
            AlgebraicConstant::t_pow(-1) * t(),
            AlgebraicConstant::one()
        );
    }

    #[test]
    fn t4_over_3_evaluates_to_one() {
        let c = t().pow(4).scale_ratio(1, 3);
        assert!(c.eval(256).unwrap().contains_rational(&Rational::from(1)));
    }

    #[test]
    fn canonical_form_drops_zeros() {
        let a = AlgebraicConstant::pi_pow(2);
        assert!((&a - &a).is_zero());
        assert_eq!((&a - &a).to_canonical_string(), "0");
    }

    #[test]
    fn human_rendering() {
        let a = AlgebraicConstant::monomial(Rational::from((1, 8)), 0, -3);
        assert_eq!(a.to_string(), "1/(8*3^(3/4))");
        let b = AlgebraicConstant::monomial(Rational::from((1, 144)), 1, -1)
            - AlgebraicConstant::monomial(Rational::from((5, 128)), -1, 3);
        assert_eq!(b.to_string(), "pi/(144*3^(1/4)) - 5*3^(3/4)/(128*pi)");
        assert_eq!(AlgebraicConstant::ratio(-1, 2).to_string(), "-1/2");
    }

    #[test]
    fn a_evaluates_to_known_decimal() {
        let a = AlgebraicConstant::monomial(Rational::from((1, 8)), 0, -3);
        // 1/(8 * 3^{3/4}) = 0.054829...
        assert!((a.eval(256).unwrap().to_f64() - 0.054_836_4).abs() < 1e-6);
    }

    fn arb_constant() -> impl Strategy<Value = AlgebraicConstant> {
        prop::collection::vec((-3i32..=3, 0i32..8, -20i64..=20, 1i64..=9), 0..5).prop_map(
            |terms| {
                terms.into_iter().fold(AlgebraicConstant::zero(), |acc, (i, j, p, q)| {
                    acc + AlgebraicConstant::monomial(Rational::from((p, q)), i, j)
                })
            },
        )
    }

    proptest! {
        #[test]
        fn ring_laws(a in arb_constant(), b in arb_constant(), c in arb_constant()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a + &b) - &b, a.clone());
        }

        #[test]
        fn eval_is_a_ring_homomorphism(a in arb_constant(), b in arb_constant()) {
            let prec = 192;
            let lhs = (&a * &b).eval(prec).unwrap();
            let rhs = a.eval(prec).unwrap().mul(&b.eval(prec).unwrap());
            prop_assert!(lhs.overlaps(&rhs));
        }
    }
}
