//! Grid and Monte Carlo verification batches for the numeric inequalities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::inequalities::{
    check_binomial_sandwich, chernoff_bound, hypergeom_tail_lower_check, janson_bound,
};
use crate::error::{Error, Result};
use crate::seeding::derive_seed;

/// One verified point: `ok` is the pass/fail of `value` against `bound`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub function: String,
    /// `name=value` pairs separated by `;`.
    pub params: String,
    pub value: f64,
    pub bound: f64,
    pub ok: bool,
}

/// The binomial sandwich on `m ∈ {10, 20, ..., 100}`, `pm ∈ {1, ..., m-1}`.
/// `bound` is whichever constant is nearer to the value.
pub fn sandwich_grid() -> Result<Vec<BoundCheck>> {
    let mut out = Vec::new();
    for m in (10..=100u64).step_by(10) {
        for j in 1..m {
            let s = check_binomial_sandwich(m, j as f64 / m as f64)?;
            let nearer = if s.value - s.lower < s.upper - s.value {
                s.lower
            } else {
                s.upper
            };
            out.push(BoundCheck {
                function: "sandwich".into(),
                params: format!("m={m};pm={j}"),
                value: s.value,
                bound: nearer,
                ok: s.ok,
            });
        }
    }
    Ok(out)
}

/// The hypergeometric tail lower bound on every precondition-satisfying point of
/// `N ∈ {200, 500, 1000, 2000}`, `d1, d2 ∈ {ceil(0.1N), ...} ∩ [1, 2N/3]` in steps of
/// `0.1N`, `K ∈ {1, 2, min(3, d1 d2 / (100N))}`.
pub fn hypergeom_tail_grid() -> Result<Vec<BoundCheck>> {
    let mut points = Vec::new();
    for population in [200u64, 500, 1000, 2000] {
        let step = population as f64 / 10.0;
        let ds: Vec<u64> = (1..)
            .map(|i| (i as f64 * step).ceil() as u64)
            .take_while(|&d| 3 * d <= 2 * population)
            .collect();
        for &d1 in &ds {
            for &d2 in &ds {
                let cap = d1 as f64 * d2 as f64 / (100.0 * population as f64);
                let mut ks = vec![1.0, 2.0, cap.min(3.0)];
                ks.dedup();
                for k in ks {
                    if k >= 1.0 && k <= cap {
                        points.push((population, d1, d2, k));
                    }
                }
            }
        }
    }
    points
        .into_par_iter()
        .map(|(population, d1, d2, k)| {
            let c = hypergeom_tail_lower_check(population, d1, d2, k)?;
            Ok(BoundCheck {
                function: "hypergeom-tail".into(),
                params: format!("N={population};d1={d1};d2={d2};K={k}"),
                value: c.tail,
                bound: c.bound,
                ok: c.ok,
            })
        })
        .collect()
}

/// Chernoff points `(m, ρ, λ)` for `X ~ Bin(m, ρ)` and event `|X - mρ| > λ`; each
/// bound is below 1.
pub const CHERNOFF_POINTS: [(usize, f64, f64); 6] = [
    (200, 0.5, 20.0),
    (200, 0.5, 30.0),
    (100, 0.3, 15.0),
    (400, 0.1, 18.0),
    (100, 0.5, 20.0),
    (1000, 0.05, 20.0),
];

/// Janson points `(m, ρ, λ, path)`: with `path`, `X` counts adjacent pairs of a
/// `ρ`-random subset of a path on `m` vertices; otherwise `X ~ Bin(m, ρ)` (Δ = 0).
pub const JANSON_POINTS: [(usize, f64, f64, bool); 6] = [
    (100, 0.5, 5.0, true),
    (200, 0.3, 6.0, true),
    (150, 0.4, 6.0, true),
    (300, 0.2, 4.0, true),
    (100, 0.3, 15.0, false),
    (200, 0.1, 8.0, false),
];

/// Empirical tail frequencies over `samples` draws per point against the Chernoff
/// and Janson bounds; a point passes when the frequency is at most
/// `b + 3 sqrt(b (1 - b) / samples)` with `b = min(bound, 1)`.
pub fn concentration_monte_carlo(samples: usize, seed: u64) -> Result<Vec<BoundCheck>> {
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let slack = |b: f64| b + 3.0 * (b * (1.0 - b) / samples as f64).sqrt();
    let chernoff = CHERNOFF_POINTS
        .par_iter()
        .enumerate()
        .map(|(i, &(m, rho, lambda))| {
            let mu = m as f64 * rho;
            let bound = chernoff_bound(mu, lambda)?.min(1.0);
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
            let hits = (0..samples)
                .filter(|_| {
                    let x = (0..m).filter(|_| rng.gen::<f64>() < rho).count() as f64;
                    (x - mu).abs() > lambda
                })
                .count();
            let freq = hits as f64 / samples as f64;
            Ok(BoundCheck {
                function: "chernoff".into(),
                params: format!("m={m};rho={rho};lambda={lambda}"),
                value: freq,
                bound,
                ok: freq <= slack(bound),
            })
        });
    let janson = JANSON_POINTS
        .par_iter()
        .enumerate()
        .map(|(i, &(m, rho, lambda, path))| {
            let (mu, delta) = if path {
                (
                    (m - 1) as f64 * rho * rho,
                    2.0 * (m - 2) as f64 * rho.powi(3),
                )
            } else {
                (m as f64 * rho, 0.0)
            };
            let bound = janson_bound(mu, delta, lambda)?.min(1.0);
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 100 + i as u64));
            let mut picked = vec![false; m];
            let hits = (0..samples)
                .filter(|_| {
                    picked.iter_mut().for_each(|b| *b = rng.gen::<f64>() < rho);
                    let x = if path {
                        picked.windows(2).filter(|w| w[0] && w[1]).count()
                    } else {
                        picked.iter().filter(|&&b| b).count()
                    };
                    x as f64 <= mu - lambda
                })
                .count();
            let freq = hits as f64 / samples as f64;
            Ok(BoundCheck {
                function: "janson".into(),
                params: format!(
                    "m={m};rho={rho};lambda={lambda};structure={}",
                    if path { "path" } else { "independent" }
                ),
                value: freq,
                bound,
                ok: freq <= slack(bound),
            })
        });
    let mut out: Vec<BoundCheck> = chernoff.collect::<Result<_>>()?;
    out.extend(janson.collect::<Result<Vec<_>>>()?);
    Ok(out)
}
