//! Dense-regime pipeline: survival window, codegree graph Γ, pruning to
//! near-regularity, matching, and completion by the best cyclic shift.

use std::collections::HashMap;

use rayon::prelude::*;

use super::matching::{matching_guarantee, maximum_matching};
use super::projection::{codegree, default_left, BipartiteProjection, Source};
use super::{check_inputs, finish, resolve, Attempt, CertifierConfig, Trace};
use crate::bounds::{classify_regime, Regime};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::oracle::distributions::hypergeom_pmf_ln;
use crate::report::{DiscrepancyReport, Provenance};
use crate::seeding::unit_uniform;

/// Below this `f0` pruning keeps almost nothing and is skipped.
const PRUNE_MIN_F0: f64 = 1e-6;

/// Inclusive integer degree range `|d - rate N| <= slack 2 sqrt(2 rate N)`, clipped to `[0, N]`.
pub fn survival_window(rate: f64, right_count: usize, slack: f64) -> (usize, usize) {
    let mean = rate * right_count as f64;
    let half = slack * 2.0 * (2.0 * mean).sqrt();
    let lo = (mean - half).ceil().max(0.0) as usize;
    let hi = ((mean + half).floor().max(0.0) as usize).min(right_count);
    (lo, hi)
}

/// Left positions of `proj` whose degree lies in the survival window for `rate`.
pub fn surviving(proj: &BipartiteProjection, rate: f64, slack: f64) -> Vec<usize> {
    let (lo, hi) = survival_window(rate, proj.right_count(), slack);
    (0..proj.left().len())
        .filter(|&i| (lo..=hi).contains(&proj.degree(i)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GammaEdge {
    /// Left position in the projection of G.
    pub u: usize,
    /// Left position in the projection of H.
    pub v: usize,
    pub codeg: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaGraph {
    pub s_left: Vec<usize>,
    pub s_right: Vec<usize>,
    /// Sorted by `(u, v)`.
    pub edges: Vec<GammaEdge>,
    /// Projection degrees indexed by left position.
    pub d1: Vec<usize>,
    pub d2: Vec<usize>,
    pub right_count: usize,
    /// `c_Γ sqrt(pqN log n)`.
    pub addend: f64,
}

impl GammaGraph {
    /// `codeg N - d1 d2`, the exact scaled excess over the conditional mean.
    pub fn excess(&self, e: &GammaEdge) -> i128 {
        e.codeg as i128 * self.right_count as i128 - (self.d1[e.u] * self.d2[e.v]) as i128
    }
}

/// Whether `codeg >= d1 d2 / N + addend`, decided on the integer part exactly.
fn meets_threshold(codeg: usize, d1: usize, d2: usize, right_count: usize, addend: f64) -> bool {
    let scaled = codeg as i128 * right_count as i128 - (d1 * d2) as i128;
    scaled as f64 >= addend * right_count as f64
}

/// Γ on the surviving vertices: `u ~ v` iff `codeg(u, v) >= d1 d2 / N + c_Γ sqrt(pqN log n)`.
pub fn gamma_graph(
    pg: &BipartiteProjection,
    ph: &BipartiteProjection,
    p: f64,
    q: f64,
    cfg: &CertifierConfig,
) -> GammaGraph {
    let big_n = pg.right_count();
    let n = pg.vertex_count();
    let addend = cfg.c_gamma * (p * q * big_n as f64 * (n as f64).ln()).sqrt();
    let s_left = surviving(pg, p, cfg.survival_slack);
    let s_right = surviving(ph, q, cfg.survival_slack);
    let d1 = pg.degrees();
    let d2 = ph.degrees();
    let edges = s_left
        .par_iter()
        .flat_map_iter(|&u| {
            let (d1, d2) = (&d1, &d2);
            s_right.iter().filter_map(move |&v| {
                let codeg = codegree(pg, u, ph, v);
                meets_threshold(codeg, d1[u], d2[v], big_n, addend).then_some(GammaEdge {
                    u,
                    v,
                    codeg,
                })
            })
        })
        .collect();
    GammaGraph {
        s_left,
        s_right,
        edges,
        d1,
        d2,
        right_count: big_n,
        addend,
    }
}

/// Smallest integer `t` with `t N - d1 d2 >= addend N`.
fn threshold_index(d1: usize, d2: usize, right_count: usize, addend: f64) -> i128 {
    let n = right_count as f64;
    let mut t = ((d1 * d2) as f64 / n + addend).ceil() as i128;
    while t > 0 && meets_threshold_int(t - 1, d1, d2, right_count, addend) {
        t -= 1;
    }
    while !meets_threshold_int(t, d1, d2, right_count, addend) {
        t += 1;
    }
    t
}

fn meets_threshold_int(t: i128, d1: usize, d2: usize, right_count: usize, addend: f64) -> bool {
    (t * right_count as i128 - (d1 * d2) as i128) as f64 >= addend * right_count as f64
}

/// `f(d1, d2) = P[codeg >= d1 d2 / N + addend]` where the codegree of two random
/// neighbourhoods of sizes `d1`, `d2` in `[N]` is hypergeometric.
pub fn edge_probability_f(d1: usize, d2: usize, right_count: usize, addend: f64) -> f64 {
    if d1 > right_count || d2 > right_count || right_count == 0 {
        return 0.0;
    }
    let t = threshold_index(d1, d2, right_count, addend).max(0) as u64;
    let (n, a, b) = (right_count as u64, d1 as u64, d2 as u64);
    let low = (a + b).saturating_sub(n);
    let high = a.min(b);
    if t > high {
        return 0.0;
    }
    let start = t.max(low);
    // pmf(x + 1) / pmf(x) = (a - x)(b - x) / ((x + 1)(n - a - b + x + 1))
    let mut term = hypergeom_pmf_ln(n, a, b, start)
        .map(f64::exp)
        .unwrap_or(0.0);
    let mut total = term;
    for x in start..high {
        term *= ((a - x) * (b - x)) as f64 / ((x + 1) * (n + x + 1 - a - b)) as f64;
        total += term;
        if term < total * 1e-17 && x as f64 > (a * b) as f64 / n as f64 {
            break;
        }
    }
    total.min(1.0)
}

/// `f0`: the minimum of `f` over the product of the two survival windows.
pub fn min_window_probability(
    window_g: (usize, usize),
    window_h: (usize, usize),
    right_count: usize,
    addend: f64,
) -> f64 {
    (window_g.0..=window_g.1)
        .into_par_iter()
        .map(|d1| {
            (window_h.0..=window_h.1)
                .map(|d2| edge_probability_f(d1, d2, right_count, addend))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// Keeps each edge independently with probability `f0 / f(d1, d2)`, using one
/// counter-based uniform per edge so the outcome does not depend on scheduling.
pub fn prune(
    gamma: &GammaGraph,
    f: impl Fn(usize, usize) -> f64 + Sync,
    f0: f64,
    seed: u64,
) -> Result<GammaGraph> {
    let kept: Result<Vec<Option<GammaEdge>>> = gamma
        .edges
        .par_iter()
        .map(|e| {
            let fv = f(gamma.d1[e.u], gamma.d2[e.v]);
            if !(fv > 0.0) {
                return Err(Error::Internal(format!(
                    "edge ({}, {}) exists but f(d1, d2) = 0",
                    e.u, e.v
                )));
            }
            let id = ((e.u as u64) << 32) | e.v as u64;
            Ok((unit_uniform(seed, id) < f0 / fv).then_some(*e))
        })
        .collect();
    Ok(GammaGraph {
        edges: kept?.into_iter().flatten().collect(),
        ..gamma.clone()
    })
}

/// Best of the `m` cyclic-shift perfect matchings `i -> (i + s) mod m` under `weight`,
/// ties to the smallest shift. Returns `(shift, total)`.
pub fn best_cyclic_shift(m: usize, weight: impl Fn(usize, usize) -> u64 + Sync) -> (usize, u64) {
    if m == 0 {
        return (0, 0);
    }
    (0..m)
        .into_par_iter()
        .map(|s| (s, (0..m).map(|i| weight(i, (i + s) % m)).sum::<u64>()))
        .reduce(
            || (usize::MAX, 0),
            |a, b| match (a.0, b.0) {
                (usize::MAX, _) => b,
                (_, usize::MAX) => a,
                _ if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) => b,
                _ => a,
            },
        )
}

/// Extends disjoint `matched` pairs (left positions of G to left positions of H) to a
/// perfect pairing of `L`, completing the leftovers by the best cyclic shift.
pub fn complete_bijection(
    pg: &BipartiteProjection,
    ph: &BipartiteProjection,
    matched: &[(usize, usize)],
) -> Result<Vec<(usize, usize)>> {
    let l = pg.left().len();
    if ph.left().len() != l {
        return Err(Error::Internal(
            "projections have different left sides".into(),
        ));
    }
    let mut used_g = vec![false; l];
    let mut used_h = vec![false; l];
    for &(u, v) in matched {
        if u >= l
            || v >= l
            || std::mem::replace(&mut used_g[u], true)
            || std::mem::replace(&mut used_h[v], true)
        {
            return Err(Error::Internal(format!(
                "matched pairs are not disjoint at ({u}, {v})"
            )));
        }
    }
    let a: Vec<usize> = (0..l).filter(|&u| !used_g[u]).collect();
    let b: Vec<usize> = (0..l).filter(|&v| !used_h[v]).collect();
    let (shift, _) = best_cyclic_shift(a.len(), |i, j| codegree(pg, a[i], ph, b[j]) as u64);
    let mut pairs = matched.to_vec();
    pairs.extend(
        a.iter()
            .enumerate()
            .map(|(i, &u)| (u, b[(i + shift) % b.len()])),
    );
    pairs.sort_unstable();
    Ok(pairs)
}

/// Dense-regime certifier; refuses parameters outside the dense regime.
pub fn certify_dense(
    g: &Hypergraph,
    h: &Hypergraph,
    p: f64,
    q: f64,
    cfg: &CertifierConfig,
) -> Result<DiscrepancyReport> {
    check_inputs(g, h, p, q, cfg)?;
    if p == 0.0 {
        return Err(Error::WrongRegime {
            actual: "sparse (p = 0)".into(),
        });
    }
    let params = classify_regime(g.n(), g.k(), p, q)?;
    if params.regime != Regime::Dense {
        return Err(Error::WrongRegime {
            actual: params.regime.to_string(),
        });
    }
    let mut trace = Trace::default();
    trace.note("regime dense");
    let left = default_left(g.n(), g.k());
    let pg = BipartiteProjection::build(g, &left, Source::G)?;
    let ph = BipartiteProjection::build(h, &left, Source::H)?;
    let attempt = dense_pipeline(g, h, &pg, &ph, p, q, cfg, &mut trace)?;
    resolve(attempt, g, h, cfg, trace)
}

#[allow(clippy::too_many_arguments)]
fn dense_pipeline(
    g: &Hypergraph,
    h: &Hypergraph,
    pg: &BipartiteProjection,
    ph: &BipartiteProjection,
    p: f64,
    q: f64,
    cfg: &CertifierConfig,
    trace: &mut Trace,
) -> Result<Attempt> {
    let (n, k) = (g.n(), g.k());
    let big_n = pg.right_count();
    trace.stage("left", pg.left().len());
    trace.stage("right", big_n);
    let gamma = gamma_graph(pg, ph, p, q, cfg);
    trace.stage("survivors_g", gamma.s_left.len());
    trace.stage("survivors_h", gamma.s_right.len());
    if gamma.s_left.is_empty() || gamma.s_right.is_empty() {
        return Ok(Attempt::Degenerate("no surviving vertices".into()));
    }
    trace.stage("gamma_edges", gamma.edges.len());
    if gamma.edges.is_empty() {
        return Ok(Attempt::Degenerate("codegree graph has no edges".into()));
    }
    let window_g = survival_window(p, big_n, cfg.survival_slack);
    let window_h = survival_window(q, big_n, cfg.survival_slack);
    let f0 = min_window_probability(window_g, window_h, big_n, gamma.addend);
    trace.stage(
        "f0_log10_floor",
        if f0 > 0.0 {
            f0.log10().floor() as i64
        } else {
            i64::MIN
        },
    );
    let budget = cfg.matching_fraction * n as f64 / k as f64;
    let pruned = if f0 < PRUNE_MIN_F0 || (gamma.edges.len() as f64) < budget {
        trace.stage("pruned", 0);
        trace.note(if f0 < PRUNE_MIN_F0 {
            "pruning skipped: f0 below 1e-6"
        } else {
            "pruning skipped: fewer gamma edges than the matching budget"
        });
        gamma
    } else {
        let mut cache = HashMap::new();
        for e in &gamma.edges {
            let key = (gamma.d1[e.u], gamma.d2[e.v]);
            cache
                .entry(key)
                .or_insert_with(|| edge_probability_f(key.0, key.1, big_n, gamma.addend));
        }
        let pruned = prune(&gamma, |a, b| cache[&(a, b)], f0, cfg.seed)?;
        trace.stage("pruned", 1);
        trace.stage("pruned_edges", pruned.edges.len());
        pruned
    };
    let (matching, excess) = matched_pairs(&pruned)?;
    trace.stage("matching", matching.len());
    let keep = budget.floor() as usize;
    let mut order: Vec<usize> = (0..matching.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(excess[i]), matching[i].0));
    order.truncate(keep);
    let truncated: Vec<(usize, usize)> = order.iter().map(|&i| matching[i]).collect();
    trace.stage("matching_truncated", truncated.len());
    if truncated.is_empty() {
        return Ok(Attempt::Degenerate(format!(
            "matching budget floor({:.3} n / k) is zero or the matching is empty",
            cfg.matching_fraction
        )));
    }
    let pairs = complete_bijection(pg, ph, &truncated)?;
    Ok(Attempt::Done(Box::new(finish(
        g,
        h,
        pg,
        ph,
        &pairs,
        Provenance::CertifierDense,
        std::mem::take(trace),
    )?)))
}

/// Maximum matching of Γ as left-position pairs, with each pair's scaled excess.
/// Matched `(u, v)` pairs with the excess codegree of each.
type ExcessMatching = (Vec<(usize, usize)>, Vec<i128>);

fn matched_pairs(gamma: &GammaGraph) -> Result<ExcessMatching> {
    let row = |u: usize| {
        gamma
            .s_left
            .binary_search(&u)
            .expect("edge endpoint survives")
    };
    let col = |v: usize| {
        gamma
            .s_right
            .binary_search(&v)
            .expect("edge endpoint survives")
    };
    let mut adj = vec![Vec::new(); gamma.s_left.len()];
    let mut excess = HashMap::new();
    for e in &gamma.edges {
        adj[row(e.u)].push(col(e.v));
        excess.insert((e.u, e.v), gamma.excess(e));
    }
    let m = maximum_matching(&adj, gamma.s_right.len());
    let guarantee = matching_guarantee(&adj, gamma.s_right.len());
    if m.len() < guarantee {
        return Err(Error::Internal(format!(
            "matching of size {} below the guarantee {guarantee}",
            m.len()
        )));
    }
    let pairs: Vec<(usize, usize)> = m
        .iter()
        .map(|&(i, j)| (gamma.s_left[i], gamma.s_right[j]))
        .collect();
    let ex = pairs.iter().map(|pair| excess[pair]).collect();
    Ok((pairs, ex))
}
