use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use reldisc::bounds::{self, BoundCheck};
use reldisc::certifier::{self, CertifierConfig, CertifierMode};
use reldisc::harness::{self, normalize_pq, ParamSpec, SweepConfig, SweepMode};
use reldisc::oracle::{self, Enumeration, PairOptions};
use reldisc::report::to_f64;
use reldisc::seeding::derive_seed;
use reldisc::{textfmt, Hypergraph};

#[derive(Parser)]
#[command(
    name = "reldisc",
    version,
    about = "Relative discrepancy of random k-uniform hypergraphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a hypergraph H^k(n, p) and write it in the text format.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact discrepancy by enumeration: disc(G, H) with two graphs, disc(H) with one.
    DiscExact(DiscExactArgs),
    /// Certified lower bound on disc+(G, H) with a checkable witness.
    Certify(CertifyArgs),
    /// The tail quantity Λ(m, ρ, K).
    Lambda {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        rho: f64,
        #[arg(long = "K")]
        big_k: f64,
    },
    /// Evaluate one bound or distribution function and print JSON.
    Bounds {
        #[command(subcommand)]
        function: BoundsFunction,
    },
    /// Run the bound verification grids and print a pass/fail CSV table.
    VerifyBounds {
        /// Batches to run (all by default).
        #[arg(long, value_enum, value_delimiter = ',')]
        which: Vec<Batch>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded parameter sweep emitting one CSV row per grid point and seed.
    Sweep(SweepArgs),
    /// Scaling summary (JSON) and optional SVG chart from a sweep CSV.
    Report {
        /// Sweep CSV.
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Hypergraph file for G (generated when omitted).
    #[arg(long)]
    g: Option<PathBuf>,
    /// Hypergraph file for H.
    #[arg(long)]
    h: Option<PathBuf>,
}

#[derive(Args)]
struct DiscExactArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Subset discrepancy disc(H) of H alone.
    #[arg(long)]
    subset: bool,
    #[arg(long)]
    branch_and_bound: bool,
    #[arg(long)]
    parallel: bool,
    /// Largest n accepted by the enumeration.
    #[arg(long)]
    guard: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    certifier: CertifierArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Default)]
struct CertifierArgs {
    /// Certifier configuration JSON (flags below override it).
    #[arg(long)]
    certifier_config: Option<PathBuf>,
    #[arg(long)]
    c_gamma: Option<f64>,
    #[arg(long)]
    survival_slack: Option<f64>,
    #[arg(long)]
    block_size_exponent: Option<f64>,
    #[arg(long)]
    stop_exponent: Option<f64>,
    #[arg(long)]
    neighborhood_tolerance: Option<f64>,
    #[arg(long)]
    matching_fraction: Option<f64>,
    #[arg(long)]
    no_fallback: bool,
    #[arg(long, value_enum)]
    certifier_mode: Option<ModeArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Pipeline,
    FallbackOnly,
}

impl CertifierArgs {
    fn apply(&self, mut cfg: CertifierConfig) -> Result<CertifierConfig> {
        if let Some(path) = &self.certifier_config {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            cfg = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
        }
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut cfg.c_gamma, self.c_gamma);
        set(&mut cfg.survival_slack, self.survival_slack);
        set(&mut cfg.block_size_exponent, self.block_size_exponent);
        set(&mut cfg.stop_exponent, self.stop_exponent);
        set(&mut cfg.neighborhood_tolerance, self.neighborhood_tolerance);
        set(&mut cfg.matching_fraction, self.matching_fraction);
        if self.no_fallback {
            cfg.fallback_enabled = false;
        }
        if let Some(m) = self.certifier_mode {
            cfg.mode = match m {
                ModeArg::Pipeline => CertifierMode::Pipeline,
                ModeArg::FallbackOnly => CertifierMode::FallbackOnly,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum BoundsFunction {
    /// 2 exp(-λ²/(4μ)).
    Chernoff {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        lambda: f64,
    },
    /// exp(-λ²/(2μ + Δ)).
    Janson {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        lambda: f64,
    },
    Entropy {
        #[arg(long)]
        p: f64,
    },
    /// C(m, pm) against the entropy sandwich.
    Sandwich {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        p: f64,
    },
    HypergeomPmf {
        #[arg(long = "N")]
        population: u64,
        #[arg(long)]
        d1: u64,
        #[arg(long)]
        d2: u64,
        #[arg(long)]
        t: u64,
    },
    /// Hypergeometric tail against e^{-40K}.
    HypergeomTail {
        #[arg(long = "N")]
        population: u64,
        #[arg(long)]
        d1: u64,
        #[arg(long)]
        d2: u64,
        #[arg(long = "K")]
        big_k: f64,
    },
    /// P[X >= t], X ~ Bin(m, ρ).
    BinomTail {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        t: u64,
    },
    Lambda {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        rho: f64,
        #[arg(long = "K")]
        big_k: f64,
    },
    Regime(PointArgs),
    /// n Λ(p C(n-1, k-1), q, log n).
    Predict(PointArgs),
    Envelope(PointArgs),
}

#[derive(Args)]
struct PointArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Batch {
    Sandwich,
    HypergeomTail,
    Concentration,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep configuration JSON; every field can be overridden by flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    /// Probability specs: `0.5`, `const:0.5` or `pow:c,alpha` (separate several with `;`).
    #[arg(long, value_delimiter = ';')]
    p: Vec<ParamSpec>,
    #[arg(long, value_delimiter = ';')]
    q: Vec<ParamSpec>,
    #[arg(long)]
    mode: Option<SweepMode>,
    #[arg(long)]
    seeds_per_point: Option<usize>,
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long)]
    master_seed: Option<u64>,
    /// CSV destination (stdout when neither this nor the config names one).
    #[arg(long)]
    output: Option<String>,
    /// Directory receiving one report JSON per row.
    #[arg(long)]
    keep_witnesses: Option<PathBuf>,
    /// Per-row wall times as CSV.
    #[arg(long)]
    timings: Option<PathBuf>,
    /// Rows recomputed and self-checked after a certify sweep.
    #[arg(long, default_value_t = 5)]
    spot_check: usize,
    #[command(flatten)]
    certifier: CertifierArgs,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn pretty(value: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.with_context(|| format!("--{flag} is required when no hypergraph file is given"))
}

/// `(G, H)` from files, or sampled from the two streams of `seed` (the same streams
/// a sweep row uses).
fn load_pair(a: &InstanceArgs) -> Result<(Hypergraph, Hypergraph)> {
    let load = |path: &Path| {
        textfmt::read_path(path).with_context(|| format!("reading {}", path.display()))
    };
    match (&a.g, &a.h) {
        (Some(g), Some(h)) => Ok((load(g)?, load(h)?)),
        (None, None) => {
            let (n, k) = (required(a.n, "n")?, required(a.k, "k")?);
            let g = Hypergraph::sample(n, k, required(a.p, "p")?, derive_seed(a.seed, 0))?;
            let h = Hypergraph::sample(n, k, required(a.q, "q")?, derive_seed(a.seed, 1))?;
            Ok((g, h))
        }
        _ => bail!("give both --g and --h, or neither"),
    }
}

fn disc_exact(a: &DiscExactArgs) -> Result<()> {
    let report = if a.subset {
        let h = match (&a.instance.h, &a.instance.g) {
            (Some(path), _) | (None, Some(path)) => textfmt::read_path(path)?,
            (None, None) => {
                let (n, k) = (required(a.instance.n, "n")?, required(a.instance.k, "k")?);
                let q = required(a.instance.q.or(a.instance.p), "q")?;
                Hypergraph::sample(n, k, q, derive_seed(a.instance.seed, 1))?
            }
        };
        oracle::exact_disc_subset_with(&h, a.guard.unwrap_or(oracle::SUBSET_GUARD))?
    } else {
        let (g, h) = load_pair(&a.instance)?;
        let opts = PairOptions {
            guard: a.guard.unwrap_or(oracle::PAIR_GUARD),
            enumeration: if a.branch_and_bound {
                Enumeration::BranchAndBound
            } else {
                Enumeration::Plain
            },
            parallel: a.parallel,
        };
        oracle::exact_disc_pair_with(&g, &h, &opts)?
    };
    emit(a.out.as_deref(), &(report.to_json() + "\n"))
}

fn certify(a: &CertifyArgs) -> Result<ExitCode> {
    let cfg = a.certifier.apply(CertifierConfig::default())?;
    let i = &a.instance;
    let (g, h, report) = if i.g.is_none() && i.h.is_none() {
        let (n, k, p, q) = (
            required(i.n, "n")?,
            required(i.k, "k")?,
            required(i.p, "p")?,
            required(i.q, "q")?,
        );
        let (inst, report) = harness::certify_instance(n, k, p, q, i.seed, &cfg)?;
        (inst.g, inst.h, report)
    } else {
        let (g, h) = load_pair(i)?;
        // densities default to the realized ones
        let p = i.p.unwrap_or_else(|| to_f64(g.edge_density()));
        let q = i.q.unwrap_or_else(|| to_f64(h.edge_density()));
        let (p, q, transform) = normalize_pq(p, q);
        let (g, h) = transform.apply(g, h);
        let cfg = CertifierConfig {
            seed: i.seed,
            ..cfg
        };
        let report = certifier::certify(&g, &h, p, q, &cfg)?;
        (g, h, report)
    };
    emit(a.out.as_deref(), &(report.to_json() + "\n"))?;
    if certifier::self_check(&g, &h, &report)? {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("witness self-check failed");
        Ok(ExitCode::from(2))
    }
}

fn bounds_json(f: &BoundsFunction) -> Result<String> {
    let v = match *f {
        BoundsFunction::Chernoff { mu, lambda } => {
            json!({"function": "chernoff", "mu": mu, "lambda": lambda, "value": bounds::chernoff_bound(mu, lambda)?})
        }
        BoundsFunction::Janson { mu, delta, lambda } => json!({
            "function": "janson", "mu": mu, "delta": delta, "lambda": lambda,
            "value": bounds::janson_bound(mu, delta, lambda)?
        }),
        BoundsFunction::Entropy { p } => {
            json!({"function": "entropy", "p": p, "value": bounds::entropy(p)?})
        }
        BoundsFunction::Sandwich { m, p } => json!(bounds::check_binomial_sandwich(m, p)?),
        BoundsFunction::HypergeomPmf {
            population,
            d1,
            d2,
            t,
        } => json!({
            "function": "hypergeom-pmf", "N": population, "d1": d1, "d2": d2, "t": t,
            "value": oracle::hypergeom_pmf(population, d1, d2, t)?
        }),
        BoundsFunction::HypergeomTail {
            population,
            d1,
            d2,
            big_k,
        } => {
            json!(bounds::hypergeom_tail_lower_check(
                population, d1, d2, big_k
            )?)
        }
        BoundsFunction::BinomTail { m, rho, t } => json!({
            "function": "binom-tail", "m": m, "rho": rho, "t": t,
            "value": oracle::binom_tail(m, rho, t)?
        }),
        BoundsFunction::Lambda { m, rho, big_k } => json!(bounds::lambda(m, rho, big_k)?),
        BoundsFunction::Regime(ref a) => json!(bounds::classify_regime(a.n, a.k, a.p, a.q)?),
        BoundsFunction::Predict(ref a) => {
            json!(bounds::predicted_disc_via_lambda(a.n, a.k, a.p, a.q)?)
        }
        BoundsFunction::Envelope(ref a) => json!(bounds::upper_envelope(a.n, a.k, a.p, a.q)?),
    };
    pretty(&v)
}

fn verify_bounds(
    which: &[Batch],
    samples: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let all = which.is_empty();
    let mut checks: Vec<BoundCheck> = Vec::new();
    if all || which.contains(&Batch::Sandwich) {
        checks.extend(bounds::sandwich_grid()?);
    }
    if all || which.contains(&Batch::HypergeomTail) {
        checks.extend(bounds::hypergeom_tail_grid()?);
    }
    if all || which.contains(&Batch::Concentration) {
        checks.extend(bounds::concentration_monte_carlo(samples, seed)?);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in &checks {
        w.serialize(c)?;
    }
    emit(out, &String::from_utf8(w.into_inner()?)?)?;
    let failed = checks.iter().filter(|c| !c.ok).count();
    eprintln!("{} checks, {failed} failed", checks.len());
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn sweep_config(a: &SweepArgs) -> Result<SweepConfig> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            // parse without validation so flags can fill in missing axes
            serde_json::from_str::<SweepConfig>(&text)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        None => SweepConfig {
            grid: harness::Grid {
                n: vec![],
                k: vec![],
                p: vec![],
                q: vec![],
            },
            seeds_per_point: 1,
            mode: a.mode.context("--mode is required without --config")?,
            output: None,
            parallelism: 1,
            master_seed: 0,
            certifier: CertifierConfig::default(),
        },
    };
    let g = &mut cfg.grid;
    if !a.n.is_empty() {
        g.n = a.n.clone();
    }
    if !a.k.is_empty() {
        g.k = a.k.clone();
    }
    if !a.p.is_empty() {
        g.p = a.p.clone();
    }
    if !a.q.is_empty() {
        g.q = a.q.clone();
    }
    if let Some(m) = a.mode {
        cfg.mode = m;
    }
    if let Some(s) = a.seeds_per_point {
        cfg.seeds_per_point = s;
    }
    if let Some(p) = a.parallelism {
        cfg.parallelism = p;
    }
    if let Some(s) = a.master_seed {
        cfg.master_seed = s;
    }
    if a.output.is_some() {
        cfg.output = a.output.clone();
    }
    cfg.certifier = a.certifier.apply(cfg.certifier)?;
    cfg.validate()?;
    Ok(cfg)
}

fn sweep(a: &SweepArgs) -> Result<ExitCode> {
    let cfg = sweep_config(a)?;
    let out = harness::run_sweep(&cfg)?;
    emit(
        cfg.output.as_deref().map(Path::new),
        &harness::csv_string(&out.rows)?,
    )?;
    if let Some(dir) = &a.keep_witnesses {
        fs::create_dir_all(dir)?;
        for (row, report) in out.rows.iter().zip(&out.reports) {
            if let Some(report) = report {
                fs::write(
                    dir.join(format!("row-{:06}.json", row.row)),
                    report.to_json() + "\n",
                )?;
            }
        }
    }
    if let Some(path) = &a.timings {
        fs::write(path, harness::timings_csv(&out.rows))?;
    }
    let errors = out.rows.iter().filter(|r| !r.error.is_empty()).count();
    if errors > 0 {
        eprintln!(
            "{errors} of {} rows failed (see the error column)",
            out.rows.len()
        );
    }
    if cfg.mode == SweepMode::Certify && a.spot_check > 0 {
        let checks = harness::spot_check(&cfg, &out.rows, a.spot_check, cfg.master_seed)?;
        let bad: Vec<usize> = checks
            .iter()
            .filter(|(_, ok)| !ok)
            .map(|(r, _)| *r)
            .collect();
        eprintln!(
            "spot check: {} rows recomputed, {} failed",
            checks.len(),
            bad.len()
        );
        if !bad.is_empty() {
            eprintln!("failed rows: {bad:?}");
            return Ok(ExitCode::from(2));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn report(input: &Path, out: Option<&Path>, svg: Option<&Path>) -> Result<()> {
    let rows = harness::read_csv(input).with_context(|| format!("reading {}", input.display()))?;
    let summary = harness::scaling_report(&rows);
    if let Some(path) = svg {
        fs::write(path, harness::render_svg(&summary))?;
    }
    emit(out, &pretty(&summary)?)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen { n, k, p, seed, out } => {
            let h = Hypergraph::sample(n, k, p, seed)?;
            emit(out.as_deref(), &textfmt::to_string(&h))?;
        }
        Command::DiscExact(a) => disc_exact(&a)?,
        Command::Certify(a) => return certify(&a),
        Command::Lambda { m, rho, big_k } => emit(
            None,
            &bounds_json(&BoundsFunction::Lambda { m, rho, big_k })?,
        )?,
        Command::Bounds { function } => emit(None, &bounds_json(&function)?)?,
        Command::VerifyBounds {
            which,
            samples,
            seed,
            out,
        } => return verify_bounds(&which, samples, seed, out.as_deref()),
        Command::Sweep(a) => return sweep(&a),
        Command::Report { input, out, svg } => report(&input, out.as_deref(), svg.as_deref())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
