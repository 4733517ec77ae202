//! Concentration inequalities and binomial-coefficient estimates as evaluable functions.

use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use crate::error::{invalid, Result};
use crate::oracle::hypergeom_upper_tail;

/// `2 exp(-λ² / 4μ)`, bounding `P[|X - μ| > λ]` for a sum of independent
/// indicators with mean `μ`. Requires `0 <= λ <= μ`. The raw value may exceed 1.
pub fn chernoff_bound(mu: f64, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !mu.is_finite() {
        return invalid(format!(
            "need a finite mean and lambda >= 0, got mu = {mu}, lambda = {lambda}"
        ));
    }
    if lambda > mu {
        return invalid(format!("lambda = {lambda} exceeds mu = {mu}"));
    }
    if lambda == 0.0 {
        return Ok(2.0);
    }
    Ok(2.0 * (-lambda * lambda / (4.0 * mu)).exp())
}

/// `exp(-λ² / (2μ + Δ))`, bounding the lower tail `P[X <= μ - λ]` of a sum of
/// dependent indicators with dependency weight `Δ`.
pub fn janson_bound(mu: f64, delta: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !(mu >= 0.0) || !(delta >= 0.0) {
        return invalid(format!(
            "need lambda > 0, mu >= 0, Delta >= 0 (got {lambda}, {mu}, {delta})"
        ));
    }
    Ok((-lambda * lambda / (2.0 * mu + delta)).exp())
}

/// `p log p + (1-p) log(1-p)`, which is negative on `(0, 1)`.
pub fn entropy(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("entropy needs 0 < p < 1, got {p}"));
    }
    Ok(p * p.ln() + (1.0 - p) * (-p).ln_1p())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Sandwich {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub ok: bool,
}

pub const SANDWICH_LOWER: f64 = 0.339_235_247_516_088_25; // sqrt(2π) / e²
pub const SANDWICH_UPPER: f64 = 0.432_627_989_716_132_53; // e / (2π)

/// Evaluates `C(m, pm) sqrt(m p (1-p)) e^{m H(p)}` against its Stirling constants.
pub fn check_binomial_sandwich(m: u64, p: f64) -> Result<Sandwich> {
    let entropy = entropy(p)?;
    let pm = p * m as f64;
    let j = pm.round();
    if (pm - j).abs() > 1e-9 * (m as f64).max(1.0) {
        return invalid(format!("p m = {pm} is not an integer"));
    }
    let ln_value =
        ln_binomial(m, j as u64) + 0.5 * (m as f64 * p * (1.0 - p)).ln() + m as f64 * entropy;
    let value = ln_value.exp();
    Ok(Sandwich {
        value,
        lower: SANDWICH_LOWER,
        upper: SANDWICH_UPPER,
        ok: (SANDWICH_LOWER..=SANDWICH_UPPER).contains(&value),
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HypergeomTailCheck {
    pub tail: f64,
    pub bound: f64,
    pub delta: f64,
    pub t_min: u64,
    pub ok: bool,
}

/// Sums the exact hypergeometric tail over `t >= d1 d2 / N + Δ`,
/// `Δ = sqrt(d1 d2 K / N)`, and compares it with `e^{-40K}`.
///
/// Requires `1 <= d1, d2 <= 2N/3` and `1 <= K <= d1 d2 / (100 N)`.
pub fn hypergeom_tail_lower_check(
    population: u64,
    d1: u64,
    d2: u64,
    k: f64,
) -> Result<HypergeomTailCheck> {
    for (name, d) in [("d1", d1), ("d2", d2)] {
        if d < 1 {
            return invalid(format!("{name} >= 1 violated ({name} = {d})"));
        }
        if 3 * d > 2 * population {
            return invalid(format!(
                "{name} <= 2N/3 violated ({name} = {d}, N = {population})"
            ));
        }
    }
    let n = population as f64;
    let product = d1 as f64 * d2 as f64;
    if !(k >= 1.0) {
        return invalid(format!("K >= 1 violated (K = {k})"));
    }
    if k > product / (100.0 * n) {
        return invalid(format!(
            "K <= d1 d2 / (100 N) violated (K = {k}, limit = {})",
            product / (100.0 * n)
        ));
    }
    let delta = (product * k / n).sqrt();
    let t_min = (product / n + delta).ceil() as u64;
    let tail = hypergeom_upper_tail(population, d1, d2, t_min)?;
    let bound = (-40.0 * k).exp();
    Ok(HypergeomTailCheck {
        tail,
        bound,
        delta,
        t_min,
        ok: tail >= bound,
    })
}
