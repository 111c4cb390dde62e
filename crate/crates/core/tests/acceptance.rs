//! Acceptance suite: one PASS/FAIL line per criterion. Runs as a plain
//! binary (`harness = false`) so the criteria share one exact table.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rug::Rational;
use unimodal::certify::{asymptotic_u, certify_all, corollary_delta, lemma_suites, scaled_delta};
use unimodal::quadrature::{k1_report, k1_term, tail_budget, N0};
use unimodal::remainders::{check_remainder_constants, RemainderGrid};
use unimodal::series::{gen_all, logconcavity_scan, u_bruteforce, NatSeries};
use unimodal::symbolic::derivation::{compare_constants, e_leading_denominator};
use unimodal::symbolic::{build_integrand_layers, derive_constants, integrate_layers, AlgebraicConstant};
use unimodal::Verdict;

mod common;

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = Result<Outcome, Box<dyn std::error::Error>>;
type Criterion = (&'static str, fn(&Tables) -> Check);

fn outcome(pass: bool, detail: impl Into<String>) -> Check {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

struct Tables {
    u: NatSeries,
    elapsed: Duration,
    peak_rss_kib: Option<u64>,
}

/// Peak resident set size of this process, from /proc.
fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

fn criterion_1(t: &Tables) -> Check {
    let u = t.u.values();
    let brute_ok = (0..=40u64).all(|n| u_bruteforce(n).map(|b| u[n as usize] == b).unwrap_or(false));
    let enum_ok = (0..=40u64).all(|n| u[n as usize] == common::unimodal_enumerated(n));
    let peak = common::unimodal_from_peak_sum(2000);
    let series_ok = peak[..] == u[..=2000];
    outcome(
        brute_ok && enum_ok && series_ok,
        format!("bruteforce n<=40: {brute_ok}, enumeration n<=40: {enum_ok}, peak-sum series n<=2000: {series_ok}"),
    )
}

fn criterion_2(t: &Tables) -> Check {
    let start = Instant::now();
    let scan = logconcavity_scan(&t.u, 1, 50_000)?;
    let elapsed = start.elapsed();
    let set = scan.exception_set();
    let has_claimed = [1, 5, 7].iter().all(|n| set.contains(n));
    let none_large = set.iter().all(|&n| n < 8);
    let cmp = scan.claim_comparison();

    let mut json = String::new();
    write!(json, "{{\"range\":[1,50000],\"exception_set\":{set:?},\"deltas\":{{")?;
    for n in 1..=7u64 {
        let sep = if n == 7 { "" } else { "," };
        write!(json, "\"{n}\":\"{}\"{sep}", scan.delta_at(n).expect("in range"))?;
    }
    json.push_str("}}\n");
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("scan_50000.json");
    std::fs::write(&path, json)?;

    let small: Vec<String> = [2u64, 3, 4, 6]
        .iter()
        .map(|&n| format!("delta({n})={}", scan.delta_at(n).expect("in range")))
        .collect();
    let mut detail = format!(
        "exceptions {set:?}, {} in {elapsed:.2?}; persisted to {}",
        small.join(" "),
        path.display()
    );
    if !cmp.agrees() {
        write!(
            detail,
            "; documented discrepancy with the claimed {{1,5,7}}: exact exceptions also include {:?}",
            cmp.unclaimed
        )?;
    }
    outcome(has_claimed && none_large && elapsed < Duration::from_secs(60), detail)
}

fn criterion_3(t: &Tables) -> Check {
    let start = Instant::now();
    let est = asymptotic_u(N0, 2048)?;
    let c = est.containment(t.u.get(N0 as usize)?)?;
    let elapsed = start.elapsed();
    outcome(
        c.verdict == Verdict::Verified && elapsed < Duration::from_secs(1),
        format!(
            "|u(n0) - main| / envelope <= {} at {} bits, {elapsed:.2?}",
            c.residual_over_envelope, est.precision
        ),
    )
}

fn criterion_4(t: &Tables) -> Check {
    let n = N0 as usize;
    let v = t.u.values();
    let mut delta = rug::Integer::from(v[n].square_ref());
    delta -= rug::Integer::from(&v[n - 1] * &v[n + 1]);
    let bounds = corollary_delta(N0, 2048)?;
    let scaled = scaled_delta(N0, &delta, 2048)?;
    let verdict = bounds.contains(&scaled);
    outcome(
        verdict == Verdict::Verified,
        format!(
            "scaled delta {} in [{}, {}]",
            scaled.mid_decimal(12),
            bounds.lower.mid_decimal(12),
            bounds.upper.mid_decimal(12)
        ),
    )
}

fn displayed_layer_fractions() -> Vec<(usize, AlgebraicConstant)> {
    let d = 127_401_984i64;
    let frac = |parts: &[(i64, i32)]| {
        parts.iter().fold(AlgebraicConstant::zero(), |acc, &(c, k)| {
            &acc + &AlgebraicConstant::monomial(Rational::from((c, d)), k, 0)
        })
    };
    vec![
        (2, frac(&[(5_308_416, 2), (-119_439_360, 0)])),
        (4, frac(&[(552_960, 4), (-11_612_160, 2), (26_127_360, 0)])),
        (6, frac(&[(93_696, 6), (-2_177_280, 4), (9_797_760, 2), (4_898_880, 0)])),
        (
            8,
            frac(&[(22_160, 8), (-579_744, 6), (3_742_200, 4), (-2_245_320, 2), (2_525_985, 0)]),
        ),
    ]
}

fn criterion_5(_: &Tables) -> Check {
    let start = Instant::now();
    let derived = derive_constants();
    let cmp = compare_constants(&derived);
    let a_to_d = cmp[..4].iter().all(|c| c.equal);
    let series = integrate_layers(&build_integrand_layers());
    let fractions = displayed_layer_fractions()
        .iter()
        .all(|(k, f)| series.coeff(*k) == *f)
        && series.coeff(0) == AlgebraicConstant::one();
    let (den_derived, den_printed) = e_leading_denominator(&derived);
    let e_finding = den_derived == 35_831_808 && den_printed == 35_831_803;
    let elapsed = start.elapsed();
    outcome(
        a_to_d && fractions && e_finding,
        format!(
            "A-D exact: {a_to_d}, layer fractions exact: {fractions}, E pi^4 denominator derived {den_derived} vs printed {den_printed} (E equal as printed: {}), {elapsed:.2?}",
            cmp[4].equal
        ),
    )
}

fn criterion_6(t: &Tables) -> Check {
    let cert = certify_all(&t.u, N0, unimodal::DEFAULT_PRECISION)?;
    let margin = cert.data.get("tail_margin_at_n_switch").cloned().unwrap_or_default();
    let m: f64 = margin.parse().unwrap_or(f64::NAN);
    outcome(
        cert.verdict == Verdict::Verified && (m - 1.6e-3).abs() < 1e-4,
        format!(
            "verdict {:?}, exception set {:?}, c0 - |c1| s - 106 s^2 = {margin}",
            cert.verdict,
            cert.exception_set.clone().unwrap_or_default()
        ),
    )
}

fn criterion_7(t: &Tables) -> Check {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [1000u64, 2000, 5000, N0] {
        let start = Instant::now();
        let eval = k1_term(n, 64, 512)?;
        let factor = if n >= N0 { 1 } else { 2 };
        let rep = k1_report(&eval, t.u.get(n as usize)?, factor)?;
        let ok2 = k1_report(&eval, t.u.get(n as usize)?, 2)?.verdict == Verdict::Verified;
        let ok = rep.verdict == Verdict::Verified && ok2;
        pass &= ok;
        parts.push(format!(
            "n={n}: (residual+budget)/e^(pi sqrt(n/3)) = {} <= {factor}: {ok} ({:.1?})",
            rep.residual_over_envelope,
            start.elapsed()
        ));
        if n >= N0 {
            let s = &eval.split_report;
            pass &= s.outer_within_bound && s.secondary_within_bound;
            let tb = tail_budget(n, 512)?;
            pass &= tb.envelope_holds && tb.exponential_claim_holds();
            parts.push(format!(
                "outer range within bound: {}, companion term <= 0.1: {}, k>=2 sum <= e^(pi sqrt(n/3)): {} (constant series {} vs claimed 10.3, documented)",
                s.outer_within_bound,
                s.secondary_within_bound,
                tb.envelope_holds,
                tb.constant_series.mid_decimal(6)
            ));
            let (rc, budget) = check_remainder_constants(&RemainderGrid::coarse())?;
            pass &= rc.verdict == Verdict::Verified;
            parts.push(format!(
                "budget chain E_n {} -> {} -> {} -> final {} <= 478",
                budget.en_total, budget.lambda_stage, budget.s_stage, budget.final_constant
            ));
        }
    }
    outcome(pass, parts.join("; "))
}

fn criterion_8(_: &Tables) -> Check {
    let start = Instant::now();
    let certs = lemma_suites(false, 256)?;
    let pass = certs.iter().all(|c| c.verdict == Verdict::Verified);
    let summary: Vec<String> = certs
        .iter()
        .map(|c| format!("{} {:?} ({} counterexamples)", c.statement, c.verdict, c.failures.len()))
        .collect();
    outcome(pass, format!("{} in {:.1?}", summary.join(", "), start.elapsed()))
}

fn criterion_9(t: &Tables) -> Check {
    let mem = t.peak_rss_kib.map(|k| k as f64 / 1024.0);
    let mem_ok = mem.map(|m| m <= 1024.0).unwrap_or(true);
    outcome(
        t.elapsed <= Duration::from_secs(600) && mem_ok,
        format!(
            "p, p2, u to 100001 in {:.2?}, peak RSS {}",
            t.elapsed,
            mem.map(|m| format!("{m:.0} MiB")).unwrap_or_else(|| "unavailable".into())
        ),
    )
}

fn main() {
    let start = Instant::now();
    let (_, _, u) = gen_all(N0 as usize + 1).expect("table generation");
    let tables = Tables {
        u,
        elapsed: start.elapsed(),
        peak_rss_kib: peak_rss_kib(),
    };

    let criteria: [Criterion; 9] = [
        ("exact oracle agreement", criterion_1),
        ("log-concavity scan to 50000", criterion_2),
        ("asymptotic formula containment at n0", criterion_3),
        ("log-concavity expansion containment at n0", criterion_4),
        ("symbolic derivation of the constants", criterion_5),
        ("end-to-end certificate", criterion_6),
        ("k = 1 quadrature residuals", criterion_7),
        ("lemma grid suites", criterion_8),
        ("table performance", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let line = match check(&tables) {
            Ok(o) if o.pass => format!("PASS criterion {}: {name}: {}", i + 1, o.detail),
            Ok(o) => {
                failed += 1;
                format!("FAIL criterion {}: {name}: {}", i + 1, o.detail)
            }
            Err(e) => {
                failed += 1;
                format!("FAIL criterion {}: {name}: error {e}", i + 1)
            }
        };
        println!("{line}");
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
