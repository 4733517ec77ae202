//! Colexicographic ranking of k-subsets.
//!
//! A strictly increasing tuple `c_0 < c_1 < ... < c_{k-1}` has rank
//! `sum_i C(c_i, i + 1)`. The rank does not depend on `n`, so edge ids stay
//! stable when the vertex set grows.

use crate::error::{invalid, Result};

/// `C(n, k)` or `None` on `u64` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}

/// `C(n, k)` as a float, usable far beyond `u64` range.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    match binomial(n, k) {
        Some(v) => v as f64,
        None => statrs::function::factorial::ln_binomial(n, k).exp(),
    }
}

/// Pascal table `table[a][b] = C(a, b)` for `a <= n`, `b <= k`, used on hot paths.
#[derive(Clone, Debug)]
pub struct BinomialTable {
    k: usize,
    rows: Vec<u64>,
}

impl BinomialTable {
    pub fn new(n: usize, k: usize) -> Self {
        let width = k + 1;
        let mut rows = vec![0u64; (n + 1) * width];
        for a in 0..=n {
            rows[a * width] = 1;
            for b in 1..=k.min(a) {
                let left = rows[(a - 1) * width + b - 1];
                let up = if b < a { rows[(a - 1) * width + b] } else { 0 };
                rows[a * width + b] = left.saturating_add(up);
            }
        }
        Self { k, rows }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> u64 {
        self.rows[a * (self.k + 1) + b]
    }

    /// Colex rank of a sorted tuple; no validation.
    #[inline]
    pub fn rank_sorted(&self, tuple: &[usize]) -> u64 {
        tuple
            .iter()
            .enumerate()
            .map(|(i, &c)| self.get(c, i + 1))
            .sum()
    }
}

/// Colex rank of a strictly increasing tuple with entries in `[0, n)`.
pub fn rank_subset(tuple: &[usize], n: usize) -> Result<u64> {
    for w in tuple.windows(2) {
        if w[0] >= w[1] {
            return invalid(format!("tuple {tuple:?} is not strictly increasing"));
        }
    }
    if let Some(&last) = tuple.last() {
        if last >= n {
            return invalid(format!("vertex {last} out of range for n = {n}"));
        }
    }
    let mut rank: u64 = 0;
    for (i, &c) in tuple.iter().enumerate() {
        let term = binomial(c as u64, i as u64 + 1)
            .ok_or_else(|| crate::Error::InvalidInput("rank overflows u64".into()))?;
        rank = rank
            .checked_add(term)
            .ok_or_else(|| crate::Error::InvalidInput("rank overflows u64".into()))?;
    }
    Ok(rank)
}

/// Inverse of [`rank_subset`].
pub fn unrank_subset(rank: u64, n: usize, k: usize) -> Result<Vec<usize>> {
    let total = binomial(n as u64, k as u64)
        .ok_or_else(|| crate::Error::InvalidInput(format!("C({n},{k}) overflows u64")))?;
    if rank >= total {
        return invalid(format!("rank {rank} out of range [0, {total})"));
    }
    let mut out = vec![0usize; k];
    unrank_into(rank, n, &mut out);
    Ok(out)
}

/// Unranks into `out` (whose length is k). Caller guarantees `rank < C(n, k)`.
pub(crate) fn unrank_into(mut rank: u64, n: usize, out: &mut [usize]) {
    let mut upper = n;
    for i in (1..=out.len()).rev() {
        // largest c < upper with C(c, i) <= rank
        let mut lo = i - 1;
        let mut hi = upper - 1;
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if binomial(mid as u64, i as u64).is_some_and(|b| b <= rank) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        out[i - 1] = lo;
        rank -= binomial(lo as u64, i as u64).unwrap_or(0);
        upper = lo;
    }
}
