//! Command implementations for the `unimodal` binary.
//!
//! Every command renders its report into a string first, so reruns with the
//! same configuration and cache produce byte-identical output.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use unimodal::certificate::Certificate;
use unimodal::certify::{asymptotic_u_with, certify_all, lemma_suites};
use unimodal::quadrature::{k1_report, k1_term, tail_budget, K1Report, N0};
use unimodal::series::{gen_all, logconcavity_scan, CLAIMED_EXCEPTIONS};
use unimodal::symbolic::derivation::{
    compare_constants, displayed_corollary_c1, e_leading_denominator, export,
};
use unimodal::symbolic::{corollary_coefficients, derive_constants};
use unimodal::{table, NatSeries, SeriesKind, Verdict};

/// Exact counts, asymptotics and log-concavity certificates for unimodal sequences.
#[derive(Debug, Parser)]
#[command(name = "unimodal", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Working precision in bits (at least 64).
    #[arg(long, global = true, default_value_t = unimodal::DEFAULT_PRECISION)]
    pub precision_bits: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Directory for cached exact tables.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// u(n), p(n) and p2(n). CSV columns: n,p,p2,u.
    Count {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        from: Option<u64>,
        #[arg(long)]
        to: Option<u64>,
    },
    /// Exact log-concavity deltas and the exception set. CSV columns: n,delta.
    Scan {
        #[arg(long, default_value_t = 1)]
        from: u64,
        #[arg(long)]
        to: u64,
    },
    /// The five-term asymptotic formula against exact u(n).
    /// CSV columns: n,main,envelope,residual_over_envelope,envelope_applies,verdict.
    Asym {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        from: Option<u64>,
        #[arg(long)]
        to: Option<u64>,
    },
    /// The k = 1 term by quadrature against exact u(n). CSV columns follow the JSON fields.
    K1 {
        #[arg(long)]
        n: u64,
        /// Gauss-Legendre nodes per panel; the reported value uses twice this.
        #[arg(long, default_value_t = 64)]
        degree: usize,
        /// Allowed multiple of e^{pi sqrt(n/3)}; defaults to 1 from n0 on and 2 below.
        #[arg(long)]
        factor: Option<u32>,
    },
    /// Derived constants A-E, exact and decimal. CSV columns: name,exact,decimal,matches_displayed.
    Constants {
        #[arg(long, default_value_t = 30)]
        digits: usize,
    },
    /// Every lemma grid suite. CSV columns: statement,verdict,failures.
    Verify {
        /// Thinner grids, for smoke runs.
        #[arg(long)]
        coarse: bool,
    },
    /// End-to-end log-concavity certificate. CSV columns: key,value.
    Certify {
        /// Switch point between the exact scan and the asymptotic argument.
        #[arg(long, default_value_t = N0)]
        n: u64,
    },
}

/// Result of one command: the rendered report and the verdict that decides
/// the exit status.
#[derive(Debug)]
pub struct Outcome {
    pub report: String,
    pub verdict: Verdict,
}

impl Outcome {
    fn ok(report: String) -> Outcome {
        Outcome {
            report,
            verdict: Verdict::Verified,
        }
    }
}

/// 0 for Verified, 1 for Failed, 3 for Inconclusive.
pub fn exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Verified => 0,
        Verdict::Failed => 1,
        Verdict::Inconclusive => 3,
    }
}

/// Runs a command and writes its report to `--out` or returns it for stdout.
pub fn run(cli: &Cli) -> Result<Outcome> {
    if cli.precision_bits < 64 {
        bail!("--precision-bits must be at least 64, got {}", cli.precision_bits);
    }
    let outcome = match &cli.command {
        Command::Count { n, from, to } => count(cli, range(*n, *from, *to, None)?)?,
        Command::Scan { from, to } => scan(cli, check_range(*from, *to)?)?,
        Command::Asym { n, from, to } => asym(cli, range(*n, *from, *to, Some(N0))?)?,
        Command::K1 { n, degree, factor } => k1(cli, *n, *degree, *factor)?,
        Command::Constants { digits } => constants(cli, *digits)?,
        Command::Verify { coarse } => verify(cli, *coarse)?,
        Command::Certify { n } => certify(cli, *n)?,
    };
    if let Some(path) = &cli.out {
        fs::write(path, &outcome.report).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(outcome)
}

fn check_range(from: u64, to: u64) -> Result<(u64, u64)> {
    if from > to {
        bail!("empty range {from}..={to}");
    }
    Ok((from, to))
}

fn range(n: Option<u64>, from: Option<u64>, to: Option<u64>, default: Option<u64>) -> Result<(u64, u64)> {
    match (n, from, to) {
        (Some(n), None, None) => Ok((n, n)),
        (None, Some(f), Some(t)) => check_range(f, t),
        (None, None, Some(t)) => check_range(0, t),
        (None, None, None) => match default {
            Some(d) => Ok((d, d)),
            None => bail!("give --n or --from/--to"),
        },
        _ => bail!("give either --n or --from/--to"),
    }
}

/// Finds a cached table of `kind` covering `need`, or generates all three
/// tables to `need` and caches them.
pub fn table_for(kind: SeriesKind, need: usize, cache: Option<&Path>) -> Result<NatSeries> {
    if let Some(dir) = cache {
        if let Some(path) = cached_table(dir, kind, need)? {
            return table::load(&path).with_context(|| format!("loading {}", path.display()));
        }
    }
    let (p, p2, u) = gen_all(need)?;
    if let Some(dir) = cache {
        for t in [&p, &p2, &u] {
            table::save(t, &table::cache_path(dir, t.kind(), need))?;
        }
    }
    Ok(match kind {
        SeriesKind::P => p,
        SeriesKind::P2 => p2,
        SeriesKind::U => u,
    })
}

/// Smallest cached table of `kind` with n_max >= need.
fn cached_table(dir: &Path, kind: SeriesKind, need: usize) -> Result<Option<PathBuf>> {
    if !dir.is_dir() {
        return Ok(None);
    }
    let prefix = format!("{}_", kind.name().to_ascii_lowercase());
    let mut best: Option<(usize, PathBuf)> = None;
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|s| s.to_str()) else {
            continue;
        };
        let Some(n_max) = name
            .strip_prefix(&prefix)
            .and_then(|s| s.strip_suffix(".tbl"))
            .and_then(|s| s.parse::<usize>().ok())
        else {
            continue;
        };
        if n_max >= need && best.as_ref().is_none_or(|(b, _)| n_max < *b) {
            best = Some((n_max, path));
        }
    }
    Ok(best.map(|(_, p)| p))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[derive(Serialize)]
struct CountRow {
    n: u64,
    p: String,
    p2: String,
    u: String,
}

#[derive(Serialize)]
struct CountJson {
    schema: &'static str,
    rows: Vec<CountRow>,
}

fn count(cli: &Cli, (from, to): (u64, u64)) -> Result<Outcome> {
    let cache = cli.cache_dir.as_deref();
    let need = to as usize;
    let p = table_for(SeriesKind::P, need, cache)?;
    let p2 = table_for(SeriesKind::P2, need, cache)?;
    let u = table_for(SeriesKind::U, need, cache)?;
    let rows: Vec<CountRow> = (from..=to)
        .map(|n| {
            let i = n as usize;
            CountRow {
                n,
                p: p.values()[i].to_string(),
                p2: p2.values()[i].to_string(),
                u: u.values()[i].to_string(),
            }
        })
        .collect();
    Ok(Outcome::ok(match cli.format {
        Format::Csv => to_csv(&rows)?,
        Format::Json => to_json(&CountJson {
            schema: "unimodal/count/v1",
            rows,
        })?,
    }))
}

#[derive(Serialize)]
struct ScanJson {
    schema: &'static str,
    from: u64,
    to: u64,
    exception_set: Vec<u64>,
    claimed_exceptions: Vec<u64>,
    unclaimed: Vec<u64>,
    claimed_but_positive: Vec<u64>,
    /// Exact deltas for n <= 7 within the range.
    small_deltas: Vec<DeltaRow>,
    exception_deltas: Vec<DeltaRow>,
}

#[derive(Serialize)]
struct DeltaRow {
    n: u64,
    delta: String,
}

fn scan(cli: &Cli, (from, to): (u64, u64)) -> Result<Outcome> {
    let from = from.max(1);
    let u = table_for(SeriesKind::U, to as usize + 1, cli.cache_dir.as_deref())?;
    let report = logconcavity_scan(&u, from, to)?;
    let text = match cli.format {
        Format::Csv => {
            let rows: Vec<DeltaRow> = report
                .deltas
                .iter()
                .map(|d| DeltaRow {
                    n: d.n,
                    delta: d.delta.to_string(),
                })
                .collect();
            to_csv(&rows)?
        }
        Format::Json => {
            let cmp = report.claim_comparison();
            to_json(&ScanJson {
                schema: "unimodal/scan/v1",
                from,
                to,
                exception_set: report.exception_set(),
                claimed_exceptions: CLAIMED_EXCEPTIONS.to_vec(),
                unclaimed: cmp.unclaimed,
                claimed_but_positive: cmp.missing_from_scan,
                small_deltas: (from..=to.min(7))
                    .map(|n| DeltaRow {
                        n,
                        delta: report.delta_at(n).expect("in range").to_string(),
                    })
                    .collect(),
                exception_deltas: report
                    .exceptions
                    .iter()
                    .map(|d| DeltaRow {
                        n: d.n,
                        delta: d.delta.to_string(),
                    })
                    .collect(),
            })?
        }
    };
    Ok(Outcome::ok(text))
}

#[derive(Serialize)]
struct AsymRow {
    n: u64,
    main: String,
    envelope: String,
    residual_over_envelope: String,
    /// The envelope is only claimed for n >= n0.
    envelope_applies: bool,
    verdict: Verdict,
}

#[derive(Serialize)]
struct AsymJson {
    schema: &'static str,
    precision: u32,
    rows: Vec<AsymRow>,
}

fn asym(cli: &Cli, (from, to): (u64, u64)) -> Result<Outcome> {
    let from = from.max(1);
    let u = table_for(SeriesKind::U, to as usize, cli.cache_dir.as_deref())?;
    let constants = derive_constants();
    let prec = cli.precision_bits.max(unimodal::certify::CONTAINMENT_PRECISION);
    let mut verdict = Verdict::Verified;
    let mut rows = Vec::new();
    for n in from..=to {
        let est = asymptotic_u_with(&constants, n, prec)?;
        let c = est.containment(u.get(n as usize)?)?;
        let applies = n >= N0;
        if applies {
            verdict = verdict.combine(c.verdict);
        }
        rows.push(AsymRow {
            n,
            main: c.main,
            envelope: c.envelope,
            residual_over_envelope: c.residual_over_envelope,
            envelope_applies: applies,
            verdict: c.verdict,
        });
    }
    let report = match cli.format {
        Format::Csv => to_csv(&rows)?,
        Format::Json => to_json(&AsymJson {
            schema: "unimodal/asym/v1",
            precision: prec,
            rows,
        })?,
    };
    Ok(Outcome { report, verdict })
}

#[derive(Serialize)]
struct K1Json {
    schema: &'static str,
    factor: u32,
    #[serde(flatten)]
    report: K1Report,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail_budget: Option<Certificate>,
}

fn k1(cli: &Cli, n: u64, degree: usize, factor: Option<u32>) -> Result<Outcome> {
    let u = table_for(SeriesKind::U, n as usize, cli.cache_dir.as_deref())?;
    let eval = k1_term(n, degree, cli.precision_bits)?;
    let factor = factor.unwrap_or(if n >= N0 { 1 } else { 2 });
    let report = k1_report(&eval, u.get(n as usize)?, factor)?;
    let verdict = report.verdict;
    let text = match cli.format {
        Format::Csv => to_csv(std::slice::from_ref(&report))?,
        Format::Json => {
            let tail = if n >= N0 {
                Some(tail_budget(n, cli.precision_bits)?.certificate())
            } else {
                None
            };
            to_json(&K1Json {
                schema: "unimodal/k1/v1",
                factor,
                report,
                tail_budget: tail,
            })?
        }
    };
    Ok(Outcome {
        report: text,
        verdict,
    })
}

#[derive(Serialize)]
struct ConstantRow {
    name: String,
    exact: String,
    decimal: String,
    matches_displayed: bool,
}

#[derive(Serialize)]
struct ConstantsJson {
    schema: &'static str,
    constants: Vec<ConstantRow>,
    comparisons: Vec<unimodal::symbolic::derivation::ConstantComparison>,
    e_pi4_denominator_derived: String,
    e_pi4_denominator_displayed: String,
    corollary: Vec<ConstantRow>,
}

fn constants(cli: &Cli, digits: usize) -> Result<Outcome> {
    let prec = cli.precision_bits;
    let derived = derive_constants();
    let comparisons = compare_constants(&derived);
    let mut rows = Vec::new();
    for ((name, c), cmp) in ["A", "B", "C", "D", "E"]
        .iter()
        .zip(derived.as_array())
        .zip(&comparisons)
    {
        let e = export(name, c, digits, prec)?;
        rows.push(ConstantRow {
            name: e.name,
            exact: e.exact,
            decimal: e.decimal,
            matches_displayed: cmp.equal,
        });
    }
    let text = match cli.format {
        Format::Csv => to_csv(&rows)?,
        Format::Json => {
            let (den_derived, den_displayed) = e_leading_denominator(&derived);
            let (c0, c1) = corollary_coefficients(&derived.a, &derived.b);
            let printed = displayed_corollary_c1(&derived.a, &derived.b);
            let corollary = [("c0", c0, true), ("c1", c1, false), ("c1_printed", printed, true)]
                .iter()
                .map(|(name, c, same)| {
                    let e = export(name, c, digits, prec)?;
                    Ok(ConstantRow {
                        name: e.name,
                        exact: e.exact,
                        decimal: e.decimal,
                        matches_displayed: *same,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            to_json(&ConstantsJson {
                schema: "unimodal/constants/v1",
                constants: rows,
                comparisons,
                e_pi4_denominator_derived: den_derived.to_string(),
                e_pi4_denominator_displayed: den_displayed.to_string(),
                corollary,
            })?
        }
    };
    Ok(Outcome::ok(text))
}

#[derive(Serialize)]
struct SuiteRow {
    statement: String,
    verdict: Verdict,
    failures: usize,
}

fn verify(cli: &Cli, coarse: bool) -> Result<Outcome> {
    let certs = lemma_suites(coarse, cli.precision_bits.min(1024))?;
    let verdict = certs
        .iter()
        .fold(Verdict::Verified, |v, c| v.combine(c.verdict));
    let report = match cli.format {
        Format::Csv => to_csv(
            &certs
                .iter()
                .map(|c| SuiteRow {
                    statement: c.statement.clone(),
                    verdict: c.verdict,
                    failures: c.failures.len(),
                })
                .collect::<Vec<_>>(),
        )?,
        Format::Json => to_json(&certs)?,
    };
    Ok(Outcome { report, verdict })
}

#[derive(Serialize)]
struct KeyValue<'a> {
    key: &'a str,
    value: &'a str,
}

fn certify(cli: &Cli, n_switch: u64) -> Result<Outcome> {
    let u = table_for(SeriesKind::U, n_switch as usize + 1, cli.cache_dir.as_deref())?;
    let cert = certify_all(&u, n_switch, cli.precision_bits)?;
    let report = match cli.format {
        Format::Json => to_json(&cert)?,
        Format::Csv => {
            let verdict = format!("{:?}", cert.verdict);
            let exceptions = format!("{:?}", cert.exception_set.clone().unwrap_or_default());
            let mut rows = vec![
                KeyValue { key: "statement", value: &cert.statement },
                KeyValue { key: "verdict", value: &verdict },
                KeyValue { key: "exception_set", value: &exceptions },
            ];
            rows.extend(cert.data.iter().map(|(k, v)| KeyValue { key: k, value: v }));
            to_csv(&rows)?
        }
    };
    Ok(Outcome {
        report,
        verdict: cert.verdict,
    })
}
