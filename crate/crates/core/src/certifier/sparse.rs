//! Sparse-regime greedy: blocks of `L_G` claim disjoint neighbourhoods, then
//! vertices of `L_H` are matched to a claimant whose neighbourhood they hit
//! often enough (regime 2.1) or contain (regime 2.2).

use fixedbitset::FixedBitSet;

use super::projection::{default_left, BipartiteProjection, Source};
use super::{check_inputs, finish, resolve, Attempt, CertifierConfig, Trace};
use crate::bounds::{classify_regime, Regime};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::report::{DiscrepancyReport, Provenance};

/// How an `H`-vertex must relate to a claimed neighbourhood to be matched.
#[derive(Clone, Copy, Debug)]
enum Rule {
    /// `|N_u ∩ N_H(v)| >= hits`.
    Intersect { hits: usize },
    /// `N_u ⊆ N_H(v)`.
    Contain,
}

/// A vertex of `L_G` admitted into a block, with the right indices it claimed.
struct Claimant {
    u: usize,
    claimed: Vec<usize>,
}

/// The greedy matching stage on its own: pairs `(u, v)` of left vertices with
/// `N_u` claimed in `G̃` and `v`'s neighbourhood in `H̃` satisfying the rule.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatching {
    pub regime: Regime,
    /// Required hits under the intersection rule (regime 2.1); `None` means containment.
    pub min_hits: Option<usize>,
    pub admitted: usize,
    pub left_size: usize,
    pub pairs: Vec<(usize, usize)>,
}

fn sparse_rule(n: usize, k: usize, p: f64, q: f64, trace: &mut Trace) -> Result<(Regime, Rule)> {
    let params = classify_regime(n, k, p, q)?;
    let gamma = match (params.regime, params.gamma) {
        (Regime::Dense, _) | (_, None) => {
            return Err(Error::WrongRegime {
                actual: params.regime.to_string(),
            })
        }
        (_, Some(gamma)) => gamma,
    };
    trace.note(format!("regime {}", params.regime));
    if params.regime == Regime::SparseModerate {
        let hits = ((n as f64).ln() / (6.0 * gamma.ln())).ceil().max(1.0) as usize;
        trace.stage("rule_min_hits", hits);
        Ok((params.regime, Rule::Intersect { hits }))
    } else {
        Ok((params.regime, Rule::Contain))
    }
}

/// Runs only the block-greedy matching (no completion), for inspection.
pub fn sparse_matching(
    g: &Hypergraph,
    h: &Hypergraph,
    p: f64,
    q: f64,
    cfg: &CertifierConfig,
) -> Result<SparseMatching> {
    check_inputs(g, h, p, q, cfg)?;
    let mut trace = Trace::default();
    let (regime, rule) = sparse_rule(g.n(), g.k(), p, q, &mut trace)?;
    let left = default_left(g.n(), g.k());
    let pg = BipartiteProjection::build(g, &left, Source::G)?;
    let ph = BipartiteProjection::build(h, &left, Source::H)?;
    let pairs = greedy_blocks(&pg, &ph, p, rule, cfg, &mut trace);
    Ok(SparseMatching {
        regime,
        min_hits: match rule {
            Rule::Intersect { hits } => Some(hits),
            Rule::Contain => None,
        },
        admitted: trace.stages["admitted"] as usize,
        left_size: left.len(),
        pairs: pairs.into_iter().map(|(u, v)| (left[u], left[v])).collect(),
    })
}

/// Sparse-regime certifier. `p = 0` is accepted (γ infinite) and degenerates to the fallback.
pub fn certify_sparse(
    g: &Hypergraph,
    h: &Hypergraph,
    p: f64,
    q: f64,
    cfg: &CertifierConfig,
) -> Result<DiscrepancyReport> {
    check_inputs(g, h, p, q, cfg)?;
    let mut trace = Trace::default();
    let left = default_left(g.n(), g.k());
    let pg = BipartiteProjection::build(g, &left, Source::G)?;
    let ph = BipartiteProjection::build(h, &left, Source::H)?;
    let attempt = if p == 0.0 {
        trace.note("regime sparse (p = 0)");
        Attempt::Degenerate("p = 0: no vertex can be admitted".into())
    } else {
        let (_, rule) = sparse_rule(g.n(), g.k(), p, q, &mut trace)?;
        let matched = greedy_blocks(&pg, &ph, p, rule, cfg, &mut trace);
        complete(g, h, &pg, &ph, matched, &mut trace)?
    };
    resolve(attempt, g, h, cfg, trace)
}

/// Block-greedy matching in left-index coordinates, sorted by `u`.
fn greedy_blocks(
    pg: &BipartiteProjection,
    ph: &BipartiteProjection,
    p: f64,
    rule: Rule,
    cfg: &CertifierConfig,
    trace: &mut Trace,
) -> Vec<(usize, usize)> {
    let n = pg.vertex_count() as f64;
    let l = pg.left().len();
    let big_n = pg.right_count();
    let np = big_n as f64 * p;
    let admit = ((1.0 - cfg.neighborhood_tolerance) * np).max(1.0);
    let cap = ((1.0 + cfg.neighborhood_tolerance) * np).ceil().max(1.0) as usize;
    let block = (n.powf(cfg.block_size_exponent).round() as usize).max(1);
    let stop = n.powf(cfg.stop_exponent);
    trace.stage("left", l);
    trace.stage("right", big_n);
    trace.stage("block_size", block);
    trace.stage("blocks", l / block);
    trace.stage("claim_cap", cap);

    let h_lists: Vec<Vec<usize>> = (0..l).map(|j| ph.neighbors(j).ones().collect()).collect();
    let mut mate_g = vec![usize::MAX; l];
    let mut matched_h = vec![false; l];
    let mut admitted_total = 0usize;
    // owner[r] = index into the block's claimant list, valid while stamp[r] == block id
    let mut owner = vec![0usize; big_n];
    let mut stamp = vec![usize::MAX; big_n];
    for (b, members) in (0..l / block).map(|b| (b, b * block..(b + 1) * block)) {
        let mut claimed = FixedBitSet::with_capacity(big_n);
        let mut claimants: Vec<Claimant> = Vec::new();
        for u in members {
            let available: Vec<usize> = pg
                .neighbors(u)
                .ones()
                .filter(|&r| !claimed.contains(r))
                .collect();
            if (available.len() as f64) < admit {
                continue;
            }
            let take: Vec<usize> = available.into_iter().take(cap).collect();
            for &r in &take {
                claimed.insert(r);
                owner[r] = claimants.len();
                stamp[r] = b;
            }
            claimants.push(Claimant { u, claimed: take });
        }
        admitted_total += claimants.len();
        let mut alive = vec![true; claimants.len()];
        let mut remaining = claimants.len();
        let mut hits = vec![0usize; claimants.len()];
        let mut touched = Vec::new();
        for v in 0..l {
            if (remaining as f64) < stop {
                break;
            }
            if matched_h[v] {
                continue;
            }
            for &r in &h_lists[v] {
                if stamp[r] == b && alive[owner[r]] {
                    if hits[owner[r]] == 0 {
                        touched.push(owner[r]);
                    }
                    hits[owner[r]] += 1;
                }
            }
            let chosen = touched
                .iter()
                .copied()
                .filter(|&c| match rule {
                    Rule::Intersect { hits: need } => hits[c] >= need,
                    Rule::Contain => hits[c] == claimants[c].claimed.len(),
                })
                .min();
            for &c in &touched {
                hits[c] = 0;
            }
            touched.clear();
            if let Some(c) = chosen {
                alive[c] = false;
                remaining -= 1;
                mate_g[claimants[c].u] = v;
                matched_h[v] = true;
            }
        }
    }
    let matched: Vec<(usize, usize)> = mate_g
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != usize::MAX)
        .map(|(u, &v)| (u, v))
        .collect();
    trace.stage("admitted", admitted_total);
    trace.stage("sparse_matched", matched.len());
    matched
}

/// Pairs the unmatched left vertices in ascending order and builds the report.
fn complete(
    g: &Hypergraph,
    h: &Hypergraph,
    pg: &BipartiteProjection,
    ph: &BipartiteProjection,
    matched: Vec<(usize, usize)>,
    trace: &mut Trace,
) -> Result<Attempt> {
    if matched.is_empty() {
        return Ok(Attempt::Degenerate("no block produced a match".into()));
    }
    let l = pg.left().len();
    let mut mate_g = vec![usize::MAX; l];
    let mut matched_h = vec![false; l];
    for &(u, v) in &matched {
        mate_g[u] = v;
        matched_h[v] = true;
    }
    let mut free_h = (0..l).filter(|&v| !matched_h[v]);
    let mut pairs = matched;
    for (u, _) in mate_g.iter().enumerate().filter(|(_, &v)| v == usize::MAX) {
        pairs.push((u, free_h.next().expect("equal leftover counts")));
    }
    pairs.sort_unstable();
    trace.stage(
        "leftover_pairs",
        l - trace.stages["sparse_matched"] as usize,
    );
    Ok(Attempt::Done(Box::new(finish(
        g,
        h,
        pg,
        ph,
        &pairs,
        Provenance::CertifierSparse,
        std::mem::take(trace),
    )?)))
}
