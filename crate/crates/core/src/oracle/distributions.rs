//! Exact and log-space binomial / hypergeometric probabilities.
//!
//! The rational routines are exact for any parameters but get slow beyond a
//! few hundred trials; the log-space routines sum terms largest-first with
//! Neumaier compensation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::saddle::{ln_binom_pmf, ln_hypergeom_pmf};

use crate::error::{invalid, Result};

/// Largest population for which the hypergeometric helpers use exact rationals.
pub const HYPERGEOM_EXACT_LIMIT: u64 = 200;
/// Largest trial count for which [`binom_tail`] uses exact rationals.
pub const BINOM_EXACT_LIMIT: u64 = 64;

fn big_binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn check_hypergeom(population: u64, d1: u64, d2: u64) -> Result<()> {
    if d1 > population || d2 > population {
        return invalid(format!(
            "hypergeometric needs d1, d2 <= N (N = {population}, d1 = {d1}, d2 = {d2})"
        ));
    }
    Ok(())
}

/// `C(d1, t) C(N - d1, d2 - t) / C(N, d2)` exactly; zero outside the support.
pub fn hypergeom_pmf_exact(population: u64, d1: u64, d2: u64, t: u64) -> Result<BigRational> {
    check_hypergeom(population, d1, d2)?;
    if t > d1.min(d2) || d2 - t > population - d1 {
        return Ok(BigRational::zero());
    }
    Ok(BigRational::new(
        big_binomial(d1, t) * big_binomial(population - d1, d2 - t),
        big_binomial(population, d2),
    ))
}

/// Natural log of the hypergeometric pmf; `-inf` outside the support.
pub fn hypergeom_pmf_ln(population: u64, d1: u64, d2: u64, t: u64) -> Result<f64> {
    check_hypergeom(population, d1, d2)?;
    Ok(hypergeom_ln_unchecked(population, d1, d2, t))
}

fn hypergeom_ln_unchecked(population: u64, d1: u64, d2: u64, t: u64) -> f64 {
    ln_hypergeom_pmf(population, d1, d2, t)
}

pub fn hypergeom_pmf(population: u64, d1: u64, d2: u64, t: u64) -> Result<f64> {
    Ok(hypergeom_pmf_ln(population, d1, d2, t)?.exp())
}

/// `P[X >= t_min]` for `X ~ Hypergeometric(N, d1, d2)`.
///
/// Exact rational arithmetic for `N <= 200`, log-space otherwise.
pub fn hypergeom_upper_tail(population: u64, d1: u64, d2: u64, t_min: u64) -> Result<f64> {
    check_hypergeom(population, d1, d2)?;
    let hi = d1.min(d2);
    if t_min > hi {
        return Ok(0.0);
    }
    if population <= HYPERGEOM_EXACT_LIMIT {
        let mut num = BigInt::zero();
        for t in t_min..=hi {
            if d2 - t <= population - d1 {
                num += big_binomial(d1, t) * big_binomial(population - d1, d2 - t);
            }
        }
        let r = BigRational::new(num, big_binomial(population, d2));
        return Ok(r.to_f64().unwrap_or(0.0));
    }
    let terms = (t_min..=hi).map(|t| hypergeom_ln_unchecked(population, d1, d2, t));
    Ok(log_sum_exp(terms).exp().min(1.0))
}

/// Log of a sum of exponentials, summed largest-first with compensation.
pub(crate) fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let mut logs: Vec<f64> = terms.filter(|l| l.is_finite()).collect();
    if logs.is_empty() {
        return f64::NEG_INFINITY;
    }
    logs.sort_by(|a, b| b.total_cmp(a));
    let top = logs[0];
    ln_of_scaled_sum(top, logs.iter().map(|l| (l - top).exp()))
}

fn ln_of_scaled_sum(top: f64, scaled: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in scaled {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    top + (sum + comp).ln()
}

/// `P[X >= t]` for `X ~ Binomial(m, rho)` as an exact rational, with `rho`
/// taken as the exact value of its binary representation.
pub fn binom_tail_exact(m: u64, rho: &BigRational, t: u64) -> BigRational {
    if t == 0 {
        return BigRational::one();
    }
    if t > m {
        return BigRational::zero();
    }
    let miss = BigRational::one() - rho;
    let mut sum = BigRational::zero();
    for j in t..=m {
        sum += BigRational::from(big_binomial(m, j)) * pow(rho, j) * pow(&miss, m - j);
    }
    sum
}

fn pow(base: &BigRational, e: u64) -> BigRational {
    num_traits::pow(base.clone(), e as usize)
}

pub(crate) fn exact_rho(rho: f64) -> BigRational {
    BigRational::from_float(rho).expect("finite probability")
}

/// Natural log of `P[X >= t]`, `X ~ Binomial(m, rho)`, computed in log space.
pub fn binom_tail_ln(m: u64, rho: f64, t: u64) -> f64 {
    if t == 0 {
        return 0.0;
    }
    if t > m || rho <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if rho >= 1.0 {
        return 0.0;
    }
    let miss = 1.0 - rho;
    let mode = ((m + 1) as f64 * rho).floor() as u64;
    let mut terms = Vec::new();
    let mut best = f64::NEG_INFINITY;
    if t <= mode {
        // tail near 1: go through the lower tail so ln stays strictly negative
        for j in (0..t).rev() {
            let l = ln_binom_pmf(j as f64, m as f64, rho, miss);
            best = best.max(l);
            terms.push(l);
            if l < best - 60.0 {
                break;
            }
        }
        return (-log_sum_exp(terms.into_iter()).exp()).ln_1p().min(0.0);
    }
    for j in t..=m {
        let l = ln_binom_pmf(j as f64, m as f64, rho, miss);
        best = best.max(l);
        terms.push(l);
        // past the mode terms only shrink; stop once they are negligible
        if j > mode && l < best - 60.0 {
            break;
        }
    }
    log_sum_exp(terms.into_iter()).min(0.0)
}

/// `P[X >= t]` for `X ~ Binomial(m, rho)`.
///
/// Exact rational evaluation for `m <= 64`, compensated log-space summation
/// above. `t = m + 1` gives 0 and `t = 0` gives 1.
pub fn binom_tail(m: u64, rho: f64, t: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return invalid(format!("success probability {rho} outside [0, 1]"));
    }
    if m <= BINOM_EXACT_LIMIT {
        let r = binom_tail_exact(m, &exact_rho(rho), t);
        return Ok(r.to_f64().unwrap_or(0.0));
    }
    Ok(binom_tail_ln(m, rho, t).exp())
}
