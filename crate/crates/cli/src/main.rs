//! `lcbounds`: verification suites, capacity reports, extremal scans and a
//! Blahut–Arimoto capacity estimator for log-concave noise.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod noise;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use logconcave::ba::{ba_capacity, build_channel, BaOptions, Constraint, GridSpec};
use logconcave::capacity::{gaussian_mixture_bound, panc_slack, verdu_bounds, CapacityReport};
use logconcave::extremal::{
    exploratory_scan, extremal_grid_scan, necessary_condition_root, surface, uvw_table, write_surface_csv,
};
use logconcave::functionals::Units;
use logconcave::inequality::{batch_verify, BatchConfig, Suite, Verdict};
use serde_json::json;

const OK: u8 = 0;
const VIOLATION: u8 = 1;
const USAGE: u8 = 2;
const NO_CONVERGENCE: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "lcbounds", version, about = "Entropy and capacity bounds for log-concave noise")]
struct Cli {
    /// Worker threads for parallel batches (default: all cores)
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Report information quantities in nats or bits
    #[arg(long, global = true, value_enum, default_value_t = UnitArg::Nats)]
    units: UnitArg,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum UnitArg {
    Nats,
    Bits,
}

impl From<UnitArg> for Units {
    fn from(u: UnitArg) -> Units {
        match u {
            UnitArg::Nats => Units::Nats,
            UnitArg::Bits => Units::Bits,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run inequality suites on random densities and fixtures
    Verify(VerifyArgs),
    /// Capacity bounds (and optionally a BA estimate) for one noise
    Capacity(CapacityArgs),
    /// Scan the two-point extremal inequality
    Scan(ScanArgs),
    /// Blahut–Arimoto capacity estimate for one noise
    Ba(BaArgs),
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Base seed; required whenever random trials run
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long, default_value_t = 100)]
    trials: usize,

    /// Suite name, `all`, or `fixtures` (all suites on the fixtures only); repeatable
    #[arg(long = "suite", default_value = "all")]
    suites: Vec<String>,

    /// Moment orders, comma separated
    #[arg(long = "p", value_delimiter = ',')]
    ps: Vec<f64>,

    /// Rényi orders in [0, 1], comma separated
    #[arg(long = "q", value_delimiter = ',')]
    qs: Vec<f64>,

    /// Also evaluate the fixtures
    #[arg(long)]
    fixtures: bool,

    /// Tolerance applied to every verdict
    #[arg(long, env = "LCBOUNDS_TOL")]
    tol: Option<f64>,

    /// Grid size for convolution suites
    #[arg(long, default_value_t = 4096)]
    grid_points: usize,

    /// Directory for reports.jsonl and summary.csv (summary goes to stdout otherwise)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct NoiseArgs {
    /// Builtin noise, inline JSON, or path to a JSON density
    #[arg(long, value_name = "NOISE")]
    noise: String,

    /// Variance of even builtin noises
    #[arg(long, default_value_t = 1.0)]
    variance: f64,

    /// Mean of positive builtin noises
    #[arg(long, default_value_t = 1.0)]
    mean: f64,

    /// Power (even noise) or mean (positive noise) budget
    #[arg(long, default_value_t = 1.0)]
    budget: f64,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Input grid points, optionally followed by output points: m[,n]
    #[arg(long, value_delimiter = ',', num_args = 1..=2)]
    grid: Vec<usize>,

    /// Width of the certified capacity interval
    #[arg(long, env = "LCBOUNDS_TOL")]
    tol: Option<f64>,

    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
}

impl SolverArgs {
    fn spec(&self) -> Result<GridSpec> {
        let mut spec = GridSpec::default();
        match self.grid[..] {
            [] => {}
            [m] => spec.m = m,
            [m, n] => {
                spec.m = m;
                spec.n = Some(n);
            }
            _ => bail!("--grid takes m or m,n"),
        }
        Ok(spec)
    }

    fn options(&self) -> Result<BaOptions> {
        let tol = positive_tol(self.tol)?.unwrap_or(BaOptions::default().tol);
        Ok(BaOptions { tol, max_iter: self.max_iter, ..Default::default() })
    }
}

#[derive(Debug, Args)]
struct CapacityArgs {
    #[command(flatten)]
    noise: NoiseArgs,

    /// Include a Blahut–Arimoto estimate
    #[arg(long)]
    ba: bool,

    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct BaArgs {
    #[command(flatten)]
    noise: NoiseArgs,

    /// Cost constraint; defaults to `mean` for positive noises and `power` otherwise
    #[arg(long, value_parser = ["power", "mean"])]
    constraint: Option<String>,

    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct ScanArgs {
    /// Moment order
    #[arg(long, default_value_t = 2.0)]
    p: f64,

    /// s grid as start:end:step
    #[arg(long, default_value = "0:10:0.1")]
    s: String,

    /// t grid as start:end:step
    #[arg(long, default_value = "0.05:10:0.05")]
    t: String,

    /// Print the table of u, v, w over the t grid instead
    #[arg(long, conflicts_with = "root")]
    uvw: bool,

    /// Print the root of log Γ(p+2) = p and exit
    #[arg(long)]
    root: bool,

    /// CSV output path (stdout otherwise)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn positive_tol(tol: Option<f64>) -> Result<Option<f64>> {
    match tol {
        Some(t) if !(t > 0.0) || !t.is_finite() => bail!("tolerance must be positive, got {t}"),
        t => Ok(t),
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn verify(args: &VerifyArgs, units: Units) -> Result<u8> {
    let mut cfg = BatchConfig { trials: args.trials, include_fixtures: args.fixtures, grid_points: args.grid_points, ..Default::default() };
    let mut suites = Vec::new();
    for name in &args.suites {
        match name.as_str() {
            "all" => suites.extend(Suite::ALL),
            "fixtures" => {
                suites.extend(Suite::ALL);
                cfg.trials = 0;
                cfg.include_fixtures = true;
            }
            s => suites.push(Suite::parse(s)?),
        }
    }
    suites.dedup();
    cfg.suites = suites;
    if !args.ps.is_empty() {
        cfg.ps = args.ps.clone();
    }
    if !args.qs.is_empty() {
        cfg.qs = args.qs.clone();
    }
    cfg.tolerance = positive_tol(args.tol)?;
    if cfg.trials > 0 {
        cfg.seed = args.seed.context("--seed is required for random trials")?;
    }
    let mut outcome = batch_verify(&cfg)?;
    for r in &mut outcome.reports {
        r.report = r.report.clone().in_units(units);
    }
    let violations = outcome.violations();
    match &args.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let mut jsonl = BufWriter::new(File::create(dir.join("reports.jsonl"))?);
            outcome.write_jsonl(&mut jsonl)?;
            jsonl.flush()?;
            let mut csv = BufWriter::new(File::create(dir.join("summary.csv"))?);
            outcome.write_summary_csv(&mut csv)?;
            csv.flush()?;
            writeln!(io::stdout().lock(), "{} reports, {} violated", outcome.reports.len(), violations)?;
        }
        None => outcome.write_summary_csv(io::stdout().lock())?,
    }
    for r in outcome.reports.iter().filter(|r| r.report.verdict == Verdict::Violated) {
        eprintln!("violated: {} on {} (gap {:e})", r.report.name, r.report.inputs, r.report.gap);
    }
    Ok(if violations == 0 { OK } else { VIOLATION })
}

fn capacity(args: &CapacityArgs, units: Units) -> Result<u8> {
    let n = &args.noise;
    let noise = noise::load(&n.noise, n.variance, n.mean)?;
    let d = noise.density.as_ref();
    let mut code = OK;
    let estimate = if args.ba {
        let constraint = if noise.positive { Constraint::Mean } else { Constraint::Power };
        let ch = build_channel(d, constraint, n.budget, &args.solver.spec()?)?;
        let r = ba_capacity(&ch, &args.solver.options()?);
        if !r.converged {
            code = NO_CONVERGENCE;
        }
        Some(r.capacity)
    } else {
        None
    };
    let conv = |x: f64| units.from_nats(x);
    let value = if noise.positive {
        let b = verdu_bounds(d, n.budget)?;
        json!({
            "noise": d.describe(),
            "P": n.budget,
            "lower_verdu": conv(b.lower),
            "upper_verdu": conv(b.upper),
            "slack_bound": conv(panc_slack()),
            "ba_estimate": estimate.map(conv),
            "units": units,
        })
    } else {
        let mut v = serde_json::to_value(CapacityReport::new(d, n.budget, estimate)?.in_units(units))?;
        if let Some(spec) = &noise.mixture {
            v["mixture_bound"] = json!(conv(gaussian_mixture_bound(spec, n.budget)?));
        }
        v
    };
    writeln!(io::stdout().lock(), "{}", serde_json::to_string_pretty(&value)?)?;
    Ok(code)
}

fn ba(args: &BaArgs) -> Result<u8> {
    let n = &args.noise;
    let noise = noise::load(&n.noise, n.variance, n.mean)?;
    let constraint = match args.constraint.as_deref() {
        Some(s) => Constraint::parse(s)?,
        None if noise.positive => Constraint::Mean,
        None => Constraint::Power,
    };
    let ch = build_channel(noise.density.as_ref(), constraint, n.budget, &args.solver.spec()?)?;
    let r = ba_capacity(&ch, &args.solver.options()?);
    writeln!(io::stdout().lock(), "{}", serde_json::to_string_pretty(&r)?)?;
    Ok(if r.converged { OK } else { NO_CONVERGENCE })
}

fn scan(args: &ScanArgs) -> Result<u8> {
    if args.root {
        writeln!(io::stdout().lock(), "{:.9}", necessary_condition_root())?;
        return Ok(OK);
    }
    let ts = noise::parse_range(&args.t)?;
    let mut w = output(&args.out)?;
    if args.uvw {
        let table = uvw_table(&ts);
        writeln!(w, "t,u,v,w")?;
        for (t, u, v, x) in &table.rows {
            writeln!(w, "{t},{u:e},{v:e},{x:e}")?;
        }
        writeln!(w, "# min e^(-3t) min(u,v,w) = {:e}", table.min_scaled)?;
        w.flush()?;
        return Ok(if table.min_scaled >= 0.0 { OK } else { VIOLATION });
    }
    let ss = noise::parse_range(&args.s)?;
    if ts[0] <= 0.0 {
        bail!("t grid must start above 0");
    }
    write_surface_csv(&surface(args.p, &ss, &ts)?, &mut w)?;
    let report = if args.p > 0.0 && args.p <= 2.0 { extremal_grid_scan(args.p, &ss, &ts)? } else { exploratory_scan(args.p, &ss, &ts)? };
    writeln!(w, "# min G = {:e} at s = {}, t = {}", report.gap, report.params["argmin_s"], report.params["argmin_t"])?;
    w.flush()?;
    Ok(if report.verdict == Verdict::Violated { VIOLATION } else { OK })
}

fn run(cli: Cli) -> Result<u8> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let units = Units::from(cli.units);
    match &cli.command {
        Command::Verify(a) => verify(a, units),
        Command::Capacity(a) => capacity(a, units),
        Command::Scan(a) => scan(a),
        Command::Ba(a) => ba(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => ExitCode::from(OK),
        Err(e) => {
            eprintln!("error: {e:#}");
            let consistency = e.downcast_ref::<logconcave::Error>().is_some_and(|e| matches!(e, logconcave::Error::Consistency(_)));
            ExitCode::from(if consistency { VIOLATION } else { USAGE })
        }
    }
}
