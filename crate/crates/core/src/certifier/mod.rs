//! Constructive lower bounds on `disc+(G, H)`.
//!
//! Every path ends in an `L`-bijection `π` (moving only `L = {0..floor(n/k)-1}`)
//! whose overlap is computed twice: once from the codegrees of the two
//! projections plus the edges not seen by them, and once from scratch. The
//! reported value `max(0, overlap - e(G)e(H)/C(n,k))` is a lower bound on
//! `disc+` because the mean overlap over all bijections equals the baseline.

mod dense;
mod matching;
mod projection;
mod sparse;

use std::cmp::Reverse;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bijection::Bijection;
use crate::bounds::{classify_regime, Regime};
use crate::error::{invalid, Error, Result};
use crate::hypergraph::{image_rank, overlap, Hypergraph};
use crate::oracle::pair_baseline;
use crate::report::{DiscrepancyReport, Provenance, Witness};
use crate::subset::{unrank_into, BinomialTable};
use crate::Rational;

pub use dense::{
    best_cyclic_shift, certify_dense, complete_bijection, edge_probability_f, gamma_graph,
    min_window_probability, prune, survival_window, surviving, GammaEdge, GammaGraph,
};
pub use matching::{matching_guarantee, maximum_matching};
pub use projection::{codegree, codegree_matrix, default_left, BipartiteProjection, Source};
pub use sparse::{certify_sparse, sparse_matching, SparseMatching};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertifierMode {
    /// Regime pipeline, with the greedy fallback when a stage degenerates.
    #[default]
    Pipeline,
    /// Greedy codegree assignment only (baseline for A/B comparisons).
    FallbackOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifierConfig {
    /// Constant in the codegree threshold `d1 d2 / N + c sqrt(pqN log n)`.
    pub c_gamma: f64,
    /// Multiplier on the survival window `2 sqrt(2 rate N)`.
    pub survival_slack: f64,
    /// Sparse block size is `round(n^block_size_exponent)`.
    pub block_size_exponent: f64,
    /// A sparse block stops once fewer than `n^stop_exponent` candidates remain.
    pub stop_exponent: f64,
    /// Relative band realising `(1 + o(1)) N p` for claimed neighbourhoods.
    pub neighborhood_tolerance: f64,
    /// Dense matchings are truncated to `floor(matching_fraction * n / k)` pairs;
    /// pruning is skipped when Γ has fewer edges than that.
    pub matching_fraction: f64,
    pub fallback_enabled: bool,
    pub seed: u64,
    pub mode: CertifierMode,
}

impl Default for CertifierConfig {
    fn default() -> Self {
        Self {
            c_gamma: 1e-2,
            survival_slack: 1.0,
            block_size_exponent: 0.4,
            stop_exponent: 1.0 / 3.0,
            neighborhood_tolerance: 0.25,
            matching_fraction: 1.0 / 50.0,
            fallback_enabled: true,
            seed: 0,
            mode: CertifierMode::Pipeline,
        }
    }
}

impl CertifierConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("c_gamma", self.c_gamma),
            ("survival_slack", self.survival_slack),
            ("neighborhood_tolerance", self.neighborhood_tolerance),
            ("matching_fraction", self.matching_fraction),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        if self.neighborhood_tolerance >= 1.0 {
            return invalid("neighborhood_tolerance must be below 1");
        }
        if self.matching_fraction > 1.0 {
            return invalid("matching_fraction must be at most 1");
        }
        for (name, v) in [
            ("block_size_exponent", self.block_size_exponent),
            ("stop_exponent", self.stop_exponent),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return invalid(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        Ok(())
    }
}

/// Stage sizes and remarks accumulated along a certifier path.
#[derive(Clone, Debug, Default)]
pub(crate) struct Trace {
    pub stages: BTreeMap<String, i64>,
    pub notes: Vec<String>,
}

impl Trace {
    pub fn stage(&mut self, name: &str, value: impl TryInto<i64>) {
        self.stages
            .insert(name.to_string(), value.try_into().unwrap_or(i64::MAX));
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }
}

/// Outcome of a pipeline that may give up and hand over to the fallback.
pub(crate) enum Attempt {
    Done(Box<DiscrepancyReport>),
    Degenerate(String),
}

/// Certifies `disc+(G, H)` from below, dispatching on the regime of `(p, q)`.
///
/// Requires `0 <= p <= q <= 1/2`; larger densities are handled by complementing
/// first. `p = 0` is treated as sparse.
pub fn certify(
    g: &Hypergraph,
    h: &Hypergraph,
    p: f64,
    q: f64,
    cfg: &CertifierConfig,
) -> Result<DiscrepancyReport> {
    check_inputs(g, h, p, q, cfg)?;
    if cfg.mode == CertifierMode::FallbackOnly {
        let mut trace = Trace::default();
        trace.note("fallback-only mode");
        return fallback(g, h, trace);
    }
    if p > 0.0 && classify_regime(g.n(), g.k(), p, q)?.regime == Regime::Dense {
        certify_dense(g, h, p, q, cfg)
    } else {
        certify_sparse(g, h, p, q, cfg)
    }
}

pub(crate) fn check_inputs(
    g: &Hypergraph,
    h: &Hypergraph,
    p: f64,
    q: f64,
    cfg: &CertifierConfig,
) -> Result<()> {
    cfg.validate()?;
    if g.n() != h.n() || g.k() != h.k() {
        return invalid("G and H must share n and k");
    }
    if !(g.k() >= 2 && g.k() < g.n()) {
        return invalid(format!("need 2 <= k < n, got k = {}, n = {}", g.k(), g.n()));
    }
    if !(0.0 <= p && p <= q && q <= 0.5) {
        return invalid(format!(
            "need 0 <= p <= q <= 1/2 (got p = {p}, q = {q}); complement or swap first"
        ));
    }
    Ok(())
}

/// Turns an attempt into a report, running the fallback on degeneration.
pub(crate) fn resolve(
    attempt: Attempt,
    g: &Hypergraph,
    h: &Hypergraph,
    cfg: &CertifierConfig,
    mut trace: Trace,
) -> Result<DiscrepancyReport> {
    match attempt {
        Attempt::Done(report) => Ok(*report),
        Attempt::Degenerate(reason) if cfg.fallback_enabled => {
            trace.note(format!("fallback: {reason}"));
            fallback(g, h, trace)
        }
        Attempt::Degenerate(reason) => Err(Error::Degenerate(reason)),
    }
}

/// Greedy assignment on the `L x L` codegree matrix: repeatedly take the largest
/// remaining entry (ties by lowest `u`, then lowest `v`); zero entries reduce to
/// pairing the leftovers in ascending order.
pub(crate) fn fallback(
    g: &Hypergraph,
    h: &Hypergraph,
    mut trace: Trace,
) -> Result<DiscrepancyReport> {
    let left = default_left(g.n(), g.k());
    let pg = BipartiteProjection::build(g, &left, Source::G)?;
    let ph = BipartiteProjection::build(h, &left, Source::H)?;
    let entries = nonzero_codegrees(&pg, &ph);
    let l = left.len();
    let mut mate = vec![usize::MAX; l];
    let mut taken = vec![false; l];
    let mut greedy = 0usize;
    for &(_, u, v) in &entries {
        if mate[u as usize] == usize::MAX && !taken[v as usize] {
            mate[u as usize] = v as usize;
            taken[v as usize] = true;
            greedy += 1;
        }
    }
    let mut free = (0..l).filter(|&v| !taken[v]);
    for m in mate.iter_mut().filter(|m| **m == usize::MAX) {
        *m = free.next().expect("as many free targets as free sources");
    }
    trace.stage("left", l);
    trace.stage("fallback_nonzero_entries", entries.len());
    trace.stage("fallback_greedy_pairs", greedy);
    let pairs: Vec<(usize, usize)> = mate.into_iter().enumerate().collect();
    finish(g, h, &pg, &ph, &pairs, Provenance::CertifierFallback, trace)
}

/// Nonzero `(codeg, u, v)` entries sorted by decreasing codegree, then `u`, then `v`.
fn nonzero_codegrees(
    pg: &BipartiteProjection,
    ph: &BipartiteProjection,
) -> Vec<(Reverse<u32>, u32, u32)> {
    use rayon::prelude::*;
    // transpose of H's projection: right index -> left positions
    let mut owners: Vec<Vec<u32>> = vec![Vec::new(); ph.right_count()];
    for j in 0..ph.left().len() {
        for r in ph.neighbors(j).ones() {
            owners[r].push(j as u32);
        }
    }
    let l = ph.left().len();
    let mut entries: Vec<(Reverse<u32>, u32, u32)> = (0..pg.left().len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut counts = vec![0u32; l];
            for r in pg.neighbors(i).ones() {
                owners[r].iter().for_each(|&j| counts[j as usize] += 1);
            }
            counts
                .into_iter()
                .enumerate()
                .filter(|&(_, c)| c > 0)
                .map(move |(j, c)| (Reverse(c), i as u32, j as u32))
                .collect::<Vec<_>>()
        })
        .collect();
    entries.par_sort_unstable();
    entries
}

/// Builds the `L`-bijection for `pairs` (left positions of G to left positions of H,
/// covering every position), checks the overlap two ways and emits the report.
pub(crate) fn finish(
    g: &Hypergraph,
    h: &Hypergraph,
    pg: &BipartiteProjection,
    ph: &BipartiteProjection,
    pairs: &[(usize, usize)],
    provenance: Provenance,
    mut trace: Trace,
) -> Result<DiscrepancyReport> {
    let n = g.n();
    let mut map: Vec<usize> = (0..n).collect();
    for &(i, j) in pairs {
        map[pg.left()[i]] = ph.left()[j];
    }
    let pi = Bijection::with_moved_set(map, pg.left())
        .map_err(|e| Error::Internal(format!("certifier produced an invalid L-bijection: {e}")))?;
    let via_codegrees: u64 = pairs
        .iter()
        .map(|&(i, j)| codegree(pg, i, ph, j) as u64)
        .sum();
    let decomposed = via_codegrees + unprojected_overlap(g, h, pg.left(), &pi);
    let direct = overlap(g, &pi, h)?;
    if decomposed != direct {
        return Err(Error::Internal(format!(
            "overlap self-check failed: codegree decomposition {decomposed}, direct {direct}"
        )));
    }
    trace.stage("overlap", direct);
    trace.stage("overlap_from_codegrees", via_codegrees);
    let baseline = pair_baseline(g, h);
    let plus = Rational::from_integer(direct as i128) - baseline;
    trace.note("minus_value is the trivial lower bound 0; only disc+ is certified");
    Ok(DiscrepancyReport {
        value: plus.max(Rational::from_integer(0)),
        plus_value: plus,
        minus_value: Rational::from_integer(0),
        witness: Witness::Bijection(pi),
        witness_count: direct,
        baseline,
        provenance,
        stages: trace.stages,
        notes: trace.notes,
    })
}

/// Overlap contributed by the edges of `G` with `|e ∩ L| != 1`, which the projections ignore.
fn unprojected_overlap(g: &Hypergraph, h: &Hypergraph, left: &[usize], pi: &Bijection) -> u64 {
    let (n, k) = (g.n(), g.k());
    let mut in_left = vec![false; n];
    left.iter().for_each(|&u| in_left[u] = true);
    let table = BinomialTable::new(n, k);
    let mut buf = vec![0usize; k];
    let mut img = vec![0usize; k];
    g.ranks()
        .iter()
        .filter(|&&r| {
            unrank_into(r, n, &mut buf);
            buf.iter().filter(|&&v| in_left[v]).count() != 1
        })
        .filter(|&&r| h.contains_rank(image_rank(r, n, pi, &table, &mut img)))
        .count() as u64
}

/// Recomputes a certifier report from `(G, H)` and its witness alone.
///
/// Checks that the witness is an `L`-bijection for `L = {0..floor(n/k)-1}`, that
/// the stored overlap and baseline are exact, and that the reported values follow.
pub fn self_check(g: &Hypergraph, h: &Hypergraph, report: &DiscrepancyReport) -> Result<bool> {
    let Witness::Bijection(pi) = &report.witness else {
        return Ok(false);
    };
    if pi.n() != g.n() {
        return Ok(false);
    }
    let l = g.n() / g.k();
    if (l..g.n()).any(|x| pi.image(x) != x) {
        return Ok(false);
    }
    let count = overlap(g, pi, h)?;
    let baseline = pair_baseline(g, h);
    let plus = Rational::from_integer(count as i128) - baseline;
    Ok(count == report.witness_count
        && baseline == report.baseline
        && plus == report.plus_value
        && report.value == plus.max(Rational::from_integer(0))
        && report.minus_value >= Rational::from_integer(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exact_disc_pair;
    use rayon::prelude::*;

    fn sample_pair(n: usize, k: usize, p: f64, q: f64, seed: u64) -> (Hypergraph, Hypergraph) {
        (
            Hypergraph::sample(n, k, p, 2 * seed).unwrap(),
            Hypergraph::sample(n, k, q, 2 * seed + 1).unwrap(),
        )
    }

    #[test]
    fn config_validation() {
        assert!(CertifierConfig::default().validate().is_ok());
        let bad = CertifierConfig {
            block_size_exponent: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = CertifierConfig {
            c_gamma: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let json = r#"{"c_gamma": 0.5, "mode": "fallback-only"}"#;
        let cfg: CertifierConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.c_gamma, 0.5);
        assert_eq!(cfg.mode, CertifierMode::FallbackOnly);
        assert_eq!(cfg.survival_slack, 1.0);
    }

    #[test]
    fn rejects_unnormalized_densities() {
        let (g, h) = sample_pair(8, 2, 0.5, 0.5, 1);
        let cfg = CertifierConfig::default();
        assert!(certify(&g, &h, 0.4, 0.3, &cfg).is_err());
        assert!(certify(&g, &h, 0.4, 0.6, &cfg).is_err());
    }

    #[test]
    fn reports_pass_the_self_check() {
        let cfg = CertifierConfig::default();
        for seed in 0..10 {
            for &(n, k, p, q) in &[
                (12usize, 2usize, 0.5, 0.5),
                (10, 3, 0.2, 0.5),
                (30, 2, 0.05, 0.1),
            ] {
                let (g, h) = sample_pair(n, k, p, q, seed);
                let r = certify(&g, &h, p, q, &cfg).unwrap();
                assert!(self_check(&g, &h, &r).unwrap(), "n={n} k={k} seed={seed}");
                assert!(r.bijection().unwrap().respects_moved_set());
            }
        }
    }

    #[test]
    fn self_check_detects_tampering() {
        let (g, h) = sample_pair(12, 2, 0.5, 0.5, 3);
        let mut r = certify(&g, &h, 0.5, 0.5, &CertifierConfig::default()).unwrap();
        r.witness_count += 1;
        assert!(!self_check(&g, &h, &r).unwrap());
    }

    #[test]
    fn bounded_by_oracle_on_small_instances() {
        let cfg = CertifierConfig::default();
        for seed in 0..20 {
            for &(k, p, q) in &[
                (2usize, 0.2, 0.5),
                (2, 0.5, 0.5),
                (3, 0.2, 0.2),
                (3, 0.5, 0.5),
            ] {
                let (g, h) = sample_pair(7, k, p, q, seed);
                let c = certify(&g, &h, p, q, &cfg).unwrap();
                let o = exact_disc_pair(&g, &h).unwrap();
                assert!(c.value <= o.plus_value, "seed={seed} k={k}");
            }
        }
    }

    #[test]
    fn dense_floor_at_sixty_vertices() {
        // frozen regression floor: value >= 0.05 sqrt(pq C(n,2) n log n) in >= 80% of seeds
        let n = 60;
        let predicted = classify_regime(n, 2, 0.5, 0.5).unwrap().predicted;
        for cfg in [
            CertifierConfig::default(),
            CertifierConfig {
                matching_fraction: 1.0,
                ..Default::default()
            },
        ] {
            let above = (0..50u64)
                .into_par_iter()
                .filter(|&seed| {
                    let (g, h) = sample_pair(n, 2, 0.5, 0.5, seed);
                    let cfg = CertifierConfig {
                        seed,
                        ..cfg.clone()
                    };
                    certify(&g, &h, 0.5, 0.5, &cfg).unwrap().value_f64() >= 0.05 * predicted
                })
                .count();
            assert!(above >= 40, "{above} of 50 seeds above the floor");
        }
    }

    #[test]
    fn fallback_only_mode_and_disabled_fallback() {
        let (g, h) = sample_pair(12, 2, 0.5, 0.5, 5);
        let cfg = CertifierConfig {
            mode: CertifierMode::FallbackOnly,
            ..Default::default()
        };
        let r = certify(&g, &h, 0.5, 0.5, &cfg).unwrap();
        assert_eq!(r.provenance, Provenance::CertifierFallback);
        // n/(50k) < 1 pair: the dense truncation is empty at this size
        let cfg = CertifierConfig {
            fallback_enabled: false,
            ..Default::default()
        };
        assert!(matches!(
            certify(&g, &h, 0.5, 0.5, &cfg),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn fallback_prefers_large_codegrees() {
        // G̃ and H̃ coincide: the greedy assignment is the identity on L
        let g = Hypergraph::sample(16, 2, 0.5, 11).unwrap();
        let r = fallback(&g, &g, Trace::default()).unwrap();
        let pi = r.bijection().unwrap();
        let left = default_left(16, 2);
        let pg = BipartiteProjection::build(&g, &left, Source::G).unwrap();
        let total: usize = left
            .iter()
            .map(|&u| codegree(&pg, u, &pg, pi.image(u)))
            .sum();
        let diagonal: usize = left.iter().map(|&u| pg.degree(u)).sum();
        assert_eq!(total, diagonal);
    }

    #[test]
    fn deterministic_bytes() {
        let (g, h) = sample_pair(40, 2, 0.5, 0.5, 9);
        let cfg = CertifierConfig {
            matching_fraction: 0.2,
            seed: 4,
            ..Default::default()
        };
        let a = certify(&g, &h, 0.5, 0.5, &cfg).unwrap().to_json();
        let b = certify(&g, &h, 0.5, 0.5, &cfg).unwrap().to_json();
        assert_eq!(a, b);
    }
}
