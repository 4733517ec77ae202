//! The largest binomial upper deviation still reached with probability `e^{-K}`.

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::oracle::distributions::{binom_tail_ln, exact_rho, BINOM_EXACT_LIMIT};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LambdaValue {
    pub m: u64,
    pub rho: f64,
    pub k: f64,
    /// Largest integer `t` in `[0, m]` with `P[X >= t] >= e^{-K}`.
    pub t: u64,
    /// `t - m ρ`.
    pub value: f64,
}

/// `Λ(m, ρ, K) = max{t - mρ : P[X >= t] >= e^{-K}}`, `X ~ Binomial(m, ρ)`.
///
/// For `Λ' < Λ` the event `X - mρ > Λ'` contains `X >= t`, so this is the
/// supremum at integer granularity. Exact rationals for `m <= 64`.
pub fn lambda(m: u64, rho: f64, k: f64) -> Result<LambdaValue> {
    if m < 1 {
        return invalid("lambda needs m >= 1");
    }
    if !(rho > 0.0 && rho < 1.0) {
        return invalid(format!("lambda needs 0 < rho < 1, got {rho}"));
    }
    if !(k >= 0.0) || !k.is_finite() {
        return invalid(format!("lambda needs finite K >= 0, got {k}"));
    }
    let t = if m <= BINOM_EXACT_LIMIT {
        exact_threshold_index(m, rho, k)
    } else {
        log_threshold_index(m, rho, k)
    };
    Ok(LambdaValue {
        m,
        rho,
        k,
        t,
        value: t as f64 - m as f64 * rho,
    })
}

fn exact_threshold_index(m: u64, rho: f64, k: f64) -> u64 {
    let threshold = exact_rho((-k).exp());
    let p = exact_rho(rho);
    let miss = BigRational::from_integer(1.into()) - &p;
    // walk t downward accumulating exact pmf terms
    let mut tail = BigRational::zero();
    let mut binom = num_bigint::BigInt::from(1u8);
    for t in (0..=m).rev() {
        if t < m {
            // C(m, t) = C(m, t + 1) (t + 1) / (m - t)
            binom = binom * (t + 1) / (m - t);
        }
        tail += BigRational::from_integer(binom.clone())
            * num_traits::pow(p.clone(), t as usize)
            * num_traits::pow(miss.clone(), (m - t) as usize);
        if tail >= threshold {
            return t;
        }
    }
    unreachable!("P[X >= 0] = 1 >= e^-K")
}

fn log_threshold_index(m: u64, rho: f64, k: f64) -> u64 {
    // tails are nonincreasing in t: binary search for the last qualifying t
    let (mut lo, mut hi) = (0u64, m);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if binom_tail_ln(m, rho, mid) >= -k {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::binom_tail;

    #[test]
    fn anchor_cases() {
        let l = lambda(10, 0.5, 10f64.ln()).unwrap();
        assert_eq!(l.t, 7);
        assert_eq!(l.value, 2.0);
        let l = lambda(4, 0.5, 10.0).unwrap();
        assert_eq!(l.t, 4);
        assert_eq!(l.value, 2.0);
    }

    #[test]
    fn zero_exponent_is_degenerate() {
        for &(m, rho) in &[(1u64, 0.5), (20, 0.1), (64, 0.9), (300, 0.4)] {
            let l = lambda(m, rho, 0.0).unwrap();
            assert_eq!(l.t, 0);
            assert_eq!(l.value, -(m as f64) * rho);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(lambda(0, 0.5, 1.0).is_err());
        assert!(lambda(5, 0.0, 1.0).is_err());
        assert!(lambda(5, 1.0, 1.0).is_err());
        assert!(lambda(5, 0.5, -1.0).is_err());
    }

    #[test]
    fn monotone_in_k_and_threshold_in_m() {
        for &rho in &[0.1, 0.3, 0.5, 0.7] {
            for m in 1..=64u64 {
                let mut prev = f64::NEG_INFINITY;
                for i in 0..=24 {
                    let v = lambda(m, rho, i as f64 * 0.5).unwrap().value;
                    assert!(v >= prev, "K monotonicity m={m} rho={rho}");
                    prev = v;
                }
            }
            // the threshold t grows with m, so the value can drop by at most rho per step
            for &k in &[0.5, 1.0, 2.0, 5.0] {
                let mut prev = lambda(1, rho, k).unwrap();
                for m in 2..=64u64 {
                    let cur = lambda(m, rho, k).unwrap();
                    assert!(cur.t >= prev.t, "t monotonicity m={m} rho={rho} K={k}");
                    assert!(
                        cur.value >= prev.value - rho - 1e-12,
                        "m={m} rho={rho} K={k}"
                    );
                    prev = cur;
                }
            }
        }
    }

    #[test]
    fn log_path_agrees_with_tail_definition() {
        for &(m, rho, k) in &[(65u64, 0.5, 2.0), (500, 0.1, 4.6), (2000, 0.37, 1.0)] {
            let l = lambda(m, rho, k).unwrap();
            let thr = (-k).exp();
            assert!(binom_tail(m, rho, l.t).unwrap() >= thr * (1.0 - 1e-12));
            if l.t < m {
                assert!(binom_tail(m, rho, l.t + 1).unwrap() < thr * (1.0 + 1e-12));
            }
        }
    }
}
