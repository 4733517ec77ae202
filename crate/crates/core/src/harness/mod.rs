//! Seeded parameter sweeps, scaling summaries and their CSV / SVG output.

mod config;
mod scaling;
mod svg;

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{Grid, ParamSpec, SweepConfig, SweepMode};
pub use scaling::{scaling_report, GroupSummary, PointSummary, ScalingSummary, SLOPE_TOLERANCE};
pub use svg::render_svg;

use crate::bounds::{classify_regime, predicted_disc_via_lambda, upper_envelope};
use crate::certifier::{certify, self_check, CertifierConfig};
use crate::error::{invalid, Error, Result};
use crate::hypergraph::Hypergraph;
use crate::oracle::exact_disc_pair;
use crate::report::{to_f64, DiscrepancyReport};
use crate::seeding::derive_seed;

/// Version tag written in the first column of every CSV row.
pub const SCHEMA: &str = "v1";

/// Which reductions [`normalize_pq`] applied, in the order they are applied to `(G, H)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transform {
    pub complement_g: bool,
    pub complement_h: bool,
    pub swap: bool,
}

impl Transform {
    /// `none`, or the applied steps joined by `+`.
    pub fn tag(&self) -> String {
        let steps: Vec<&str> = [
            (self.complement_g, "complement-G"),
            (self.complement_h, "complement-H"),
            (self.swap, "swap"),
        ]
        .into_iter()
        .filter_map(|(on, name)| on.then_some(name))
        .collect();
        if steps.is_empty() {
            "none".into()
        } else {
            steps.join("+")
        }
    }

    /// Applies the complements, then the swap. Discrepancy is invariant under all three.
    pub fn apply(&self, g: Hypergraph, h: Hypergraph) -> (Hypergraph, Hypergraph) {
        let g = if self.complement_g { g.complement() } else { g };
        let h = if self.complement_h { h.complement() } else { h };
        if self.swap {
            (h, g)
        } else {
            (g, h)
        }
    }
}

/// Maps `(p, q)` to `p' <= q' <= 1/2` by complementing densities above 1/2 and swapping.
pub fn normalize_pq(p: f64, q: f64) -> (f64, f64, Transform) {
    let mut t = Transform::default();
    let (mut p, mut q) = (p, q);
    if p > 0.5 {
        p = 1.0 - p;
        t.complement_g = true;
    }
    if q > 0.5 {
        q = 1.0 - q;
        t.complement_h = true;
    }
    if p > q {
        std::mem::swap(&mut p, &mut q);
        t.swap = true;
    }
    (p, q, t)
}

/// A random instance `G ~ H^k(n, p)`, `H ~ H^k(n, q)` after normalization.
pub struct Instance {
    pub g: Hypergraph,
    pub h: Hypergraph,
    pub p_norm: f64,
    pub q_norm: f64,
    pub transform: Transform,
}

/// Samples `G` and `H` from the two streams of `seed` and normalizes them.
pub fn generate_instance(n: usize, k: usize, p: f64, q: f64, seed: u64) -> Result<Instance> {
    if !(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0) {
        return invalid(format!("need p, q in (0, 1), got p = {p}, q = {q}"));
    }
    let g = Hypergraph::sample(n, k, p, derive_seed(seed, 0))?;
    let h = Hypergraph::sample(n, k, q, derive_seed(seed, 1))?;
    let (p_norm, q_norm, transform) = normalize_pq(p, q);
    let (g, h) = transform.apply(g, h);
    Ok(Instance {
        g,
        h,
        p_norm,
        q_norm,
        transform,
    })
}

/// The certifier run behind one sweep row, also used by the standalone `certify` command.
pub fn certify_instance(
    n: usize,
    k: usize,
    p: f64,
    q: f64,
    seed: u64,
    cfg: &CertifierConfig,
) -> Result<(Instance, DiscrepancyReport)> {
    let inst = generate_instance(n, k, p, q, seed)?;
    let cfg = CertifierConfig {
        seed,
        ..cfg.clone()
    };
    let report = certify(&inst.g, &inst.h, inst.p_norm, inst.q_norm, &cfg)?;
    Ok((inst, report))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub schema: String,
    pub row: usize,
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub q: f64,
    pub p_norm: f64,
    pub q_norm: f64,
    pub transform: String,
    pub seed: u64,
    pub regime: String,
    pub predicted: Option<f64>,
    pub achieved: Option<f64>,
    pub ratio: Option<f64>,
    pub provenance: String,
    pub error: String,
    /// Seconds; kept out of the CSV so reruns are byte-identical.
    #[serde(skip)]
    pub wall_time: f64,
}

/// One planned row: grid point and seed, before anything is computed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RowSpec {
    pub row: usize,
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub q: f64,
    pub seed: u64,
}

/// Rows in grid order (`n`, then `k`, `p`, `q`, seed index); the seed of row `i`
/// is `derive_seed(master_seed, i)`.
pub fn plan_rows(cfg: &SweepConfig) -> Vec<RowSpec> {
    let mut rows = Vec::new();
    for &n in &cfg.grid.n {
        for &k in &cfg.grid.k {
            for p in &cfg.grid.p {
                for q in &cfg.grid.q {
                    for _ in 0..cfg.seeds_per_point {
                        let row = rows.len();
                        rows.push(RowSpec {
                            row,
                            n,
                            k,
                            p: p.eval(n),
                            q: q.eval(n),
                            seed: derive_seed(cfg.master_seed, row as u64),
                        });
                    }
                }
            }
        }
    }
    rows
}

/// Output of a sweep: rows plus the per-row reports when witnesses are kept.
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub reports: Vec<Option<DiscrepancyReport>>,
}

/// Runs every planned row on a pool of `cfg.parallelism` threads; failures are
/// recorded in the row's `error` column and never abort the sweep.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let specs = plan_rows(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism.max(1))
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let results: Vec<(SweepRow, Option<DiscrepancyReport>)> =
        pool.install(|| specs.par_iter().map(|s| run_row(cfg, s)).collect());
    let (rows, reports) = results.into_iter().unzip();
    Ok(SweepOutput { rows, reports })
}

fn run_row(cfg: &SweepConfig, spec: &RowSpec) -> (SweepRow, Option<DiscrepancyReport>) {
    let start = Instant::now();
    let (p_norm, q_norm, transform) = normalize_pq(spec.p, spec.q);
    let mut row = SweepRow {
        schema: SCHEMA.into(),
        row: spec.row,
        n: spec.n,
        k: spec.k,
        p: spec.p,
        q: spec.q,
        p_norm,
        q_norm,
        transform: transform.tag(),
        seed: spec.seed,
        regime: String::new(),
        predicted: None,
        achieved: None,
        ratio: None,
        provenance: cfg.mode.as_str().into(),
        error: String::new(),
        wall_time: 0.0,
    };
    let outcome = evaluate_row(cfg, spec, p_norm, q_norm, &mut row);
    let report = match outcome {
        Ok((achieved, report)) => {
            row.achieved = Some(achieved);
            row.ratio = row.predicted.filter(|&p| p > 0.0).map(|p| achieved / p);
            report
        }
        Err(e) => {
            row.error = e.to_string();
            None
        }
    };
    row.wall_time = start.elapsed().as_secs_f64();
    (row, report)
}

fn evaluate_row(
    cfg: &SweepConfig,
    spec: &RowSpec,
    p_norm: f64,
    q_norm: f64,
    row: &mut SweepRow,
) -> Result<(f64, Option<DiscrepancyReport>)> {
    if !(spec.p > 0.0 && spec.p < 1.0 && spec.q > 0.0 && spec.q < 1.0) {
        return invalid(format!(
            "need p, q in (0, 1), got p = {}, q = {}",
            spec.p, spec.q
        ));
    }
    let params = classify_regime(spec.n, spec.k, p_norm, q_norm)?;
    row.regime = params.regime.to_string();
    row.predicted = Some(params.predicted);
    match cfg.mode {
        SweepMode::Certify => {
            let (_, report) =
                certify_instance(spec.n, spec.k, spec.p, spec.q, spec.seed, &cfg.certifier)?;
            row.provenance = report.provenance.to_string();
            Ok((to_f64(report.value), Some(report)))
        }
        SweepMode::Oracle => {
            let inst = generate_instance(spec.n, spec.k, spec.p, spec.q, spec.seed)?;
            let report = exact_disc_pair(&inst.g, &inst.h)?;
            Ok((to_f64(report.value), Some(report)))
        }
        SweepMode::Bounds => Ok((
            predicted_disc_via_lambda(spec.n, spec.k, p_norm, q_norm)?.value,
            None,
        )),
        SweepMode::Envelope => {
            let env = upper_envelope(spec.n, spec.k, p_norm, q_norm)?;
            Ok((env.lambda + env.eps, None))
        }
    }
}

/// Writes rows as CSV with a header; the bytes depend only on the rows.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[SweepRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Internal(e.to_string()))
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
    let rows: Vec<SweepRow> = r
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_error)?;
    if let Some(bad) = rows.iter().find(|r| r.schema != SCHEMA) {
        return invalid(format!(
            "row {} has schema {:?}, expected {SCHEMA}",
            bad.row, bad.schema
        ));
    }
    Ok(rows)
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidInput(format!("csv: {other:?}")),
    }
}

/// `row,wall_time` pairs, kept apart from the deterministic CSV.
pub fn timings_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("row,wall_time\n");
    for r in rows {
        s.push_str(&format!("{},{}\n", r.row, r.wall_time));
    }
    s
}

/// Regenerates `count` rows chosen by `seed` and runs the certifier self-check on
/// each (certify mode only). Returns `(row, passed)` pairs.
pub fn spot_check(
    cfg: &SweepConfig,
    rows: &[SweepRow],
    count: usize,
    seed: u64,
) -> Result<Vec<(usize, bool)>> {
    if cfg.mode != SweepMode::Certify {
        return invalid("spot checks apply to certify sweeps");
    }
    let candidates: Vec<&SweepRow> = rows.iter().filter(|r| r.error.is_empty()).collect();
    let mut chosen: Vec<usize> = Vec::new();
    let mut i = 0u64;
    while chosen.len() < count.min(candidates.len()) {
        let pick = (derive_seed(seed, i) % candidates.len() as u64) as usize;
        if !chosen.contains(&pick) {
            chosen.push(pick);
        }
        i += 1;
    }
    chosen
        .into_iter()
        .map(|c| {
            let r = candidates[c];
            let (inst, report) = certify_instance(r.n, r.k, r.p, r.q, r.seed, &cfg.certifier)?;
            let ok =
                self_check(&inst.g, &inst.h, &report)? && r.achieved == Some(to_f64(report.value));
            Ok((r.row, ok))
        })
        .collect()
}
