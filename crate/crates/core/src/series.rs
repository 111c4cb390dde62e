//! Exact integer tables for p(n), the two-colour partition numbers p2(n) and
//! the unimodal sequence counts u(n).
//!
//! All three tables come from sparse recurrences:
//!
//! * p(n) from Euler's pentagonal number theorem,
//! * p2(n) from `P2 * (q;q)_inf = P`, which reuses the same pentagonal signs,
//! * u(n) = sum_j (-1)^j p2(n - j(j+1)/2), the false theta series times p2.
//!
//! Each step is O(n^{3/2}) big-integer additions overall.

use rayon::prelude::*;
use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeriesKind {
    P,
    P2,
    U,
}

impl SeriesKind {
    pub fn name(self) -> &'static str {
        match self {
            SeriesKind::P => "P",
            SeriesKind::P2 => "P2",
            SeriesKind::U => "U",
        }
    }

    pub fn parse(s: &str) -> Option<SeriesKind> {
        match s.to_ascii_uppercase().as_str() {
            "P" => Some(SeriesKind::P),
            "P2" => Some(SeriesKind::P2),
            "U" => Some(SeriesKind::U),
            _ => None,
        }
    }
}

/// Dense table `values[n]` for `0 <= n <= n_max`. Never empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NatSeries {
    kind: SeriesKind,
    values: Vec<Integer>,
}

impl NatSeries {
    /// The table holding only the constant term 1.
    pub fn seed(kind: SeriesKind) -> NatSeries {
        NatSeries {
            kind,
            values: vec![Integer::from(1)],
        }
    }

    pub(crate) fn from_values(kind: SeriesKind, values: Vec<Integer>) -> Result<NatSeries> {
        if values.first() != Some(&Integer::from(1)) {
            return Err(Error::Invariant(format!(
                "{} table must start with 1",
                kind.name()
            )));
        }
        if let Some(n) = values.iter().position(|v| *v < 0) {
            return Err(Error::Invariant(format!(
                "{} table has a negative entry at n = {n}",
                kind.name()
            )));
        }
        Ok(NatSeries { kind, values })
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[Integer] {
        &self.values
    }

    pub fn get(&self, n: usize) -> Result<&Integer> {
        self.values.get(n).ok_or(Error::TableCoverage {
            kind: self.kind.name(),
            have: self.n_max(),
            need: n,
        })
    }

    fn expect_kind(&self, kind: SeriesKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::WrongKind {
                expected: kind.name(),
                found: self.kind.name(),
            })
        }
    }

    fn require(&self, n: usize) -> Result<()> {
        self.get(n).map(|_| ())
    }

    fn reserve_to(&mut self, n_max: usize) -> Result<()> {
        let extra = (n_max + 1).saturating_sub(self.values.len());
        self.values
            .try_reserve_exact(extra)
            .map_err(|_| Error::Allocation(n_max + 1))
    }

    /// Continues the p(n) recurrence up to `n_max`.
    pub fn extend_p(&mut self, n_max: usize) -> Result<()> {
        self.expect_kind(SeriesKind::P)?;
        self.reserve_to(n_max)?;
        let pents = pentagonal_offsets(n_max);
        for n in self.values.len()..=n_max {
            let mut acc = Integer::new();
            accumulate_pentagonal(&mut acc, &self.values, n, &pents);
            self.values.push(acc);
        }
        Ok(())
    }

    /// Continues the p2(n) recurrence up to `n_max`; `p` must cover `n_max`.
    pub fn extend_p2(&mut self, p: &NatSeries, n_max: usize) -> Result<()> {
        self.expect_kind(SeriesKind::P2)?;
        p.expect_kind(SeriesKind::P)?;
        p.require(n_max)?;
        self.reserve_to(n_max)?;
        let pents = pentagonal_offsets(n_max);
        for n in self.values.len()..=n_max {
            let mut acc = p.values[n].clone();
            accumulate_pentagonal(&mut acc, &self.values, n, &pents);
            self.values.push(acc);
        }
        Ok(())
    }

    /// Continues u(n) up to `n_max`; `p2` must cover `n_max`.
    pub fn extend_u(&mut self, p2: &NatSeries, n_max: usize) -> Result<()> {
        self.expect_kind(SeriesKind::U)?;
        p2.expect_kind(SeriesKind::P2)?;
        p2.require(n_max)?;
        self.reserve_to(n_max)?;
        for n in self.values.len()..=n_max {
            let mut acc = Integer::new();
            let mut j = 0usize;
            let mut tri = 0usize;
            while tri <= n {
                if j.is_multiple_of(2) {
                    acc += &p2.values[n - tri];
                } else {
                    acc -= &p2.values[n - tri];
                }
                j += 1;
                tri += j;
            }
            if acc < 0 {
                return Err(Error::Invariant(format!("u({n}) came out negative")));
            }
            self.values.push(acc);
        }
        Ok(())
    }

    /// Cheap content hash over the decimal rendering, used in reports.
    pub fn checksum(&self) -> String {
        crate::table::checksum(self)
    }
}

/// Generalised pentagonal numbers g_{±k} = k(3k∓1)/2 up to `limit`, in
/// increasing order, each with its sign (-1)^{k+1} in the recurrence.
pub fn pentagonal_offsets(limit: usize) -> Vec<(usize, bool)> {
    let mut out = Vec::new();
    let mut k = 1usize;
    loop {
        let g_pos = k * (3 * k - 1) / 2;
        if g_pos > limit {
            break;
        }
        let positive = k % 2 == 1;
        out.push((g_pos, positive));
        let g_neg = k * (3 * k + 1) / 2;
        if g_neg <= limit {
            out.push((g_neg, positive));
        }
        k += 1;
    }
    out
}

fn accumulate_pentagonal(acc: &mut Integer, table: &[Integer], n: usize, pents: &[(usize, bool)]) {
    for &(g, positive) in pents {
        if g > n {
            break;
        }
        if positive {
            *acc += &table[n - g];
        } else {
            *acc -= &table[n - g];
        }
    }
}

pub fn gen_p(n_max: usize) -> Result<NatSeries> {
    let mut p = NatSeries::seed(SeriesKind::P);
    p.extend_p(n_max)?;
    Ok(p)
}

pub fn gen_p2(n_max: usize, p: &NatSeries) -> Result<NatSeries> {
    let mut p2 = NatSeries::seed(SeriesKind::P2);
    p2.extend_p2(p, n_max)?;
    Ok(p2)
}

pub fn gen_u(n_max: usize, p2: &NatSeries) -> Result<NatSeries> {
    let mut u = NatSeries::seed(SeriesKind::U);
    u.extend_u(p2, n_max)?;
    Ok(u)
}

/// All three tables up to `n_max`.
pub fn gen_all(n_max: usize) -> Result<(NatSeries, NatSeries, NatSeries)> {
    let p = gen_p(n_max)?;
    let p2 = gen_p2(n_max, &p)?;
    let u = gen_u(n_max, &p2)?;
    Ok((p, p2, u))
}

/// Largest n accepted by [`u_bruteforce`].
pub const BRUTE_FORCE_CAP: u64 = 40;

/// Counts unimodal sequences of `n` straight from the definition: a peak `c`,
/// a weakly increasing run below it and a weakly decreasing run after it,
/// i.e. two partitions with parts at most `c`. The partitions are enumerated
/// one by one.
pub fn u_bruteforce(n: u64) -> Result<u64> {
    if n > BRUTE_FORCE_CAP {
        return Err(Error::EnumerationCap {
            n,
            cap: BRUTE_FORCE_CAP,
        });
    }
    if n == 0 {
        return Ok(1);
    }
    let n = n as usize;
    let mut total = 0u64;
    for peak in 1..=n {
        let rest = n - peak;
        // bounded[m] = number of enumerated partitions of m with parts <= peak
        let bounded: Vec<u64> = (0..=rest).map(|m| count_partitions(m, peak)).collect();
        for left in 0..=rest {
            total += bounded[left] * bounded[rest - left];
        }
    }
    Ok(total)
}

/// Walks every partition of `m` with parts at most `max_part`.
fn count_partitions(m: usize, max_part: usize) -> u64 {
    fn walk(remaining: usize, max_part: usize) -> u64 {
        if remaining == 0 {
            return 1;
        }
        (1..=max_part.min(remaining))
            .map(|part| walk(remaining - part, part))
            .sum()
    }
    walk(m, max_part)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogConcavityDelta {
    pub n: u64,
    /// u(n)^2 - u(n-1) u(n+1)
    pub delta: Integer,
}

#[derive(Clone, Debug)]
pub struct ScanReport {
    pub n_lo: u64,
    pub n_hi: u64,
    pub deltas: Vec<LogConcavityDelta>,
    /// Every n in range with delta <= 0.
    pub exceptions: Vec<LogConcavityDelta>,
}

/// The exception set claimed for the unimodal counts.
pub const CLAIMED_EXCEPTIONS: [u64; 3] = [1, 5, 7];

impl ScanReport {
    pub fn exception_set(&self) -> Vec<u64> {
        self.exceptions.iter().map(|d| d.n).collect()
    }

    pub fn delta_at(&self, n: u64) -> Option<&Integer> {
        if n < self.n_lo || n > self.n_hi {
            return None;
        }
        Some(&self.deltas[(n - self.n_lo) as usize].delta)
    }

    /// Differences between the exact exception set and [`CLAIMED_EXCEPTIONS`],
    /// restricted to the scanned range.
    pub fn claim_comparison(&self) -> ClaimComparison {
        let found = self.exception_set();
        let claimed: Vec<u64> = CLAIMED_EXCEPTIONS
            .iter()
            .copied()
            .filter(|n| (self.n_lo..=self.n_hi).contains(n))
            .collect();
        ClaimComparison {
            missing_from_scan: claimed.iter().copied().filter(|n| !found.contains(n)).collect(),
            unclaimed: found.iter().copied().filter(|n| !claimed.contains(n)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClaimComparison {
    /// Claimed exceptions whose exact delta is positive.
    pub missing_from_scan: Vec<u64>,
    /// Exact exceptions that the claim does not list.
    pub unclaimed: Vec<u64>,
}

impl ClaimComparison {
    pub fn agrees(&self) -> bool {
        self.missing_from_scan.is_empty() && self.unclaimed.is_empty()
    }
}

/// Exact log-concavity deltas for `n_lo <= n <= n_hi`.
pub fn logconcavity_scan(u: &NatSeries, n_lo: u64, n_hi: u64) -> Result<ScanReport> {
    u.expect_kind(SeriesKind::U)?;
    if n_lo < 1 || n_lo > n_hi {
        return Err(Error::InvalidRange { lo: n_lo, hi: n_hi });
    }
    u.require(n_hi as usize + 1)?;
    let v = u.values();
    let deltas: Vec<LogConcavityDelta> = (n_lo..=n_hi)
        .into_par_iter()
        .map(|n| {
            let i = n as usize;
            let mut delta = Integer::from(v[i].square_ref());
            delta -= Integer::from(&v[i - 1] * &v[i + 1]);
            LogConcavityDelta { n, delta }
        })
        .collect();
    let exceptions = deltas.iter().filter(|d| d.delta <= 0).cloned().collect();
    Ok(ScanReport {
        n_lo,
        n_hi,
        deltas,
        exceptions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(t: &NatSeries) -> Vec<u64> {
        t.values().iter().map(|v| v.to_u64().unwrap()).collect()
    }

    #[test]
    fn pentagonal_offsets_and_signs() {
        let p = pentagonal_offsets(15);
        assert_eq!(
            p,
            vec![(1, true), (2, true), (5, false), (7, false), (12, true), (15, true)]
        );
    }

    #[test]
    fn seed_tables() {
        assert_eq!(ints(&gen_p(0).unwrap()), vec![1]);
        let (p, p2, u) = gen_all(0).unwrap();
        assert_eq!((p.n_max(), p2.n_max(), u.n_max()), (0, 0, 0));
        assert_eq!(u.values()[0], 1);
    }

    #[test]
    fn small_values() {
        let (p, p2, u) = gen_all(8).unwrap();
        assert_eq!(ints(&p), vec![1, 1, 2, 3, 5, 7, 11, 15, 22]);
        assert_eq!(p2.values()[3], 10);
        assert_eq!(p2.values()[5], 36);
        assert_eq!(ints(&u)[..8], [1, 1, 3, 6, 12, 21, 38, 63]);
    }

    #[test]
    fn brute_force_small() {
        assert_eq!(u_bruteforce(0).unwrap(), 1);
        assert_eq!(u_bruteforce(1).unwrap(), 1);
        assert_eq!(u_bruteforce(2).unwrap(), 3);
        assert_eq!(u_bruteforce(3).unwrap(), 6);
        assert_eq!(u_bruteforce(4).unwrap(), 12);
        assert!(matches!(
            u_bruteforce(41),
            Err(Error::EnumerationCap { n: 41, cap: 40 })
        ));
    }

    #[test]
    fn p2_needs_p_coverage() {
        let p = gen_p(5).unwrap();
        assert!(matches!(
            gen_p2(6, &p),
            Err(Error::TableCoverage { need: 6, .. })
        ));
        assert!(matches!(gen_u(3, &p), Err(Error::WrongKind { .. })));
    }

    #[test]
    fn small_deltas() {
        let (_, _, u) = gen_all(12).unwrap();
        let scan = logconcavity_scan(&u, 1, 11).unwrap();
        assert_eq!(*scan.delta_at(1).unwrap(), -2);
        assert_eq!(*scan.delta_at(2).unwrap(), 3);
        assert_eq!(*scan.delta_at(3).unwrap(), 0);
        assert!(*scan.delta_at(5).unwrap() < 0);
        assert_eq!(scan.exception_set(), vec![1, 3, 5, 7]);
        let cmp = scan.claim_comparison();
        assert_eq!(cmp.unclaimed, vec![3]);
        assert!(cmp.missing_from_scan.is_empty());
    }

    #[test]
    fn scan_range_errors() {
        let (_, _, u) = gen_all(10).unwrap();
        assert!(matches!(logconcavity_scan(&u, 0, 3), Err(Error::InvalidRange { .. })));
        assert!(matches!(logconcavity_scan(&u, 5, 3), Err(Error::InvalidRange { .. })));
        assert!(matches!(
            logconcavity_scan(&u, 1, 10),
            Err(Error::TableCoverage { need: 11, .. })
        ));
    }
}
