//! Oracles shared by the integration tests. Each one uses a route that is
//! independent of the pentagonal recurrences in the library.
#![allow(dead_code)]

use rug::Integer;

/// p(n) by the coin-change recurrence over parts 1..=n.
pub fn partitions_dp(n: usize) -> Vec<Integer> {
    let mut p = vec![Integer::new(); n + 1];
    p[0] = Integer::from(1);
    for part in 1..=n {
        for m in part..=n {
            let (lo, hi) = p.split_at_mut(m);
            hi[0] += &lo[m - part];
        }
    }
    p
}

/// Coefficients of sum_{m>=0} q^m / (q;q)_m^2 up to q^n. The square of
/// 1/(q;q)_m is updated by dividing by (1 - q^m) twice.
pub fn unimodal_from_peak_sum(n: usize) -> Vec<Integer> {
    let mut sq = vec![Integer::new(); n + 1];
    sq[0] = Integer::from(1);
    let mut u = vec![Integer::new(); n + 1];
    u[0] += 1;
    for m in 1..=n {
        for _ in 0..2 {
            for k in m..=n {
                let (lo, hi) = sq.split_at_mut(k);
                hi[0] += &lo[k - m];
            }
        }
        for k in 0..=n - m {
            u[m + k] += &sq[k];
        }
    }
    u
}

pub fn partitions_at_most(m: u64, k: u64) -> u64 {
    if m == 0 {
        return 1;
    }
    (1..=k.min(m)).map(|p| partitions_at_most(m - p, p)).sum()
}

/// Sequences a_1 <= .. <= a_r = c >= b_1 >= .. >= b_s listed by peak c.
pub fn unimodal_enumerated(n: u64) -> u64 {
    if n == 0 {
        return 1;
    }
    (1..=n)
        .map(|c| {
            let rest = n - c;
            (0..=rest)
                .map(|l| partitions_at_most(l, c) * partitions_at_most(rest - l, c))
                .sum::<u64>()
        })
        .sum()
}
