use proptest::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer};
use unimodal::series::{gen_all, gen_p, u_bruteforce, NatSeries};
use unimodal::SeriesKind;

mod common;
use common::{partitions_dp, unimodal_enumerated, unimodal_from_peak_sum};

const N: usize = 2000;

#[test]
fn p_matches_coin_change() {
    let p = gen_p(N).unwrap();
    assert_eq!(p.values(), &partitions_dp(N)[..]);
}

#[test]
fn p2_is_self_convolution_of_p() {
    let (p, p2, _) = gen_all(N).unwrap();
    let pv = p.values();
    for n in (0..=N).step_by(37).chain([N]) {
        let mut acc = Integer::new();
        for k in 0..=n {
            acc += Integer::from(&pv[k] * &pv[n - k]);
        }
        assert_eq!(p2.values()[n], acc, "n={n}");
    }
}

#[test]
fn u_matches_peak_sum_to_2000() {
    let (_, _, u) = gen_all(N).unwrap();
    assert_eq!(u.values(), &unimodal_from_peak_sum(N)[..]);
}

#[test]
fn u_matches_enumeration_to_40() {
    let (_, _, u) = gen_all(40).unwrap();
    for n in 0..=40u64 {
        let e = unimodal_enumerated(n);
        assert_eq!(u.values()[n as usize], e, "n={n}");
        assert_eq!(u_bruteforce(n).unwrap(), e, "n={n}");
    }
}

#[test]
fn known_values() {
    // OEIS A001523
    let (_, _, u) = gen_all(12).unwrap();
    let want = [1u32, 1, 3, 6, 12, 21, 38, 63, 106, 170, 272, 422, 653];
    for (n, w) in want.iter().enumerate() {
        assert_eq!(u.values()[n], *w);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn chunked_extension_matches_one_shot(cuts in proptest::collection::vec(1usize..400, 1..6)) {
        let total: usize = cuts.iter().sum();
        let (_, p2_full, u_full) = gen_all(total).unwrap();
        let p = gen_p(total).unwrap();
        let mut p2 = NatSeries::seed(SeriesKind::P2);
        let mut u = NatSeries::seed(SeriesKind::U);
        let mut reach = 0;
        for c in cuts {
            reach += c;
            p2.extend_p2(&p, reach).unwrap();
            u.extend_u(&p2, reach).unwrap();
        }
        prop_assert_eq!(p2.values(), p2_full.values());
        prop_assert_eq!(u.values(), u_full.values());
    }
}

/// Expands u(n)^2 - u(n-1)u(n+1) from the five-term formula numerically at
/// large n and reads off the first two coefficients in s = n^{-1/2}.
#[test]
fn corollary_coefficients_match_numeric_composition() {
    use unimodal::symbolic::{corollary_coefficients, derive_constants};
    let prec = 600;
    let c = derive_constants();
    let consts: Vec<Float> = c
        .as_array()
        .iter()
        .map(|k| k.eval(prec).unwrap().mid().clone())
        .collect();
    let f = |n: &Float| -> Float {
        let s = Float::with_val(prec, n.sqrt_ref()).recip();
        let mut poly = Float::with_val(prec, 0);
        for k in consts.iter().rev() {
            poly *= &s;
            poly += k;
        }
        let third = Float::with_val(prec, n / 3u32);
        let expo = Float::with_val(prec, Float::with_val(prec, rug::float::Constant::Pi) * 2u32 * third.sqrt());
        let n54 = Float::with_val(prec, n.pow(Float::with_val(prec, 1.25f64)));
        poly * expo.exp() / n54
    };
    let scaled = |nn: u64| -> f64 {
        let n = Float::with_val(prec, nn);
        let one = Float::with_val(prec, 1);
        let a = f(&n);
        let lo = f(&Float::with_val(prec, &n - &one));
        let hi = f(&Float::with_val(prec, &n + &one));
        let delta = Float::with_val(prec, a.square_ref()) - lo * hi;
        let third = Float::with_val(prec, &n / 3u32);
        let expo = Float::with_val(prec, Float::with_val(prec, rug::float::Constant::Pi) * 4u32 * third.sqrt());
        let n4 = Float::with_val(prec, n.pow(4u32));
        (delta * n4 / expo.exp()).to_f64()
    };
    let (c0, c1) = corollary_coefficients(&c.a, &c.b);
    let (c0, c1) = (c0.eval(64).unwrap().to_f64(), c1.eval(64).unwrap().to_f64());
    // g(s) = c0 + c1 s + O(s^2): fit from two large n
    let (n1, n2) = (1e12 as u64, 4e12 as u64);
    let (g1, g2) = (scaled(n1), scaled(n2));
    let (s1, s2) = (1.0 / (n1 as f64).sqrt(), 1.0 / (n2 as f64).sqrt());
    let slope = (g1 - g2) / (s1 - s2);
    let intercept = g1 - slope * s1;
    assert!((intercept - c0).abs() < 1e-9, "{intercept} vs {c0}");
    assert!((slope - c1).abs() < 1e-6, "{slope} vs {c1}");
    assert!((c0 - 0.002_727_077).abs() < 1e-8);
}

#[test]
fn leading_constant_numeric() {
    let a = unimodal::symbolic::derive_constants().a.eval(128).unwrap().to_f64();
    assert!((a - 1.0 / (8.0 * 3f64.powf(0.75))).abs() < 1e-16);
}
