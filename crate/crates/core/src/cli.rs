//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 solver non-convergence (outputs are
//! still written and flagged), 3 usage or configuration error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::Error;
use crate::exec::Execution;
use crate::fem::Norm;
use crate::harness::{
    asc_sweep, best_per_direction, default_epsilons, gradient_check_random, rate_sweep, write_gradient_csv,
    SweepOptions,
};
use crate::manufactured::NamedProblem;
use crate::optimizer::{log_grid, solve_path, solve_regularized, OptimizerOptions, PathMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_NONCONVERGED: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "bangbang", version, about = "Tikhonov regularization paths for bang-bang control problems")]
struct Cli {
    /// JSON file whose keys mirror the flags; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for cold-start sweeps and checks.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for random sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one regularized problem and write the solution as JSON.
    Solve(SolveArgs),
    /// Trace the regularization path and write per-alpha diagnostics as CSV.
    Path(PathArgs),
    /// Rate table against the exact solution with fitted log-log slopes.
    Rates(PathArgs),
    /// Level-set measure sweep of the exact adjoint.
    Asc(AscArgs),
    /// Finite-difference check of the adjoint gradient.
    Gradcheck(GradArgs),
}

#[derive(Debug, Args, Serialize)]
struct Common {
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_outer: Option<usize>,
    /// Iterate the projected fixed-point map instead of prox-gradient steps.
    #[arg(long)]
    fixed_point: bool,
}

#[derive(Debug, Args)]
struct PathArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_negative_numbers = true)]
    alpha_max: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha_min: Option<f64>,
    #[arg(long)]
    per_decade: Option<usize>,
    /// Solve every alpha from a cold start (parallel with --jobs).
    #[arg(long)]
    cold: bool,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_outer: Option<usize>,
}

#[derive(Debug, Args)]
struct AscArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    eps_min: Option<f64>,
    #[arg(long)]
    eps_max: Option<f64>,
    #[arg(long)]
    eps_count: Option<usize>,
}

#[derive(Debug, Args)]
struct GradArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    directions: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
}

/// Flag values layered over an optional JSON config.
struct Settings {
    file: Map<String, Value>,
}

impl Settings {
    fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self { file: Map::new() });
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        match serde_json::from_str(&text) {
            Ok(Value::Object(file)) => Ok(Self { file }),
            Ok(_) => Err(CliError::Usage("config must be a JSON object".into())),
            Err(e) => Err(CliError::Usage(format!("invalid config JSON: {e}"))),
        }
    }

    fn get<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v.clone())
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key `{key}`: {e}"))),
        }
    }

    fn flag(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        Ok(flag || self.get::<bool>(None, key)?.unwrap_or(false))
    }

    fn required<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<T, CliError> {
        self.get(flag, key)?.ok_or_else(|| CliError::Usage(format!("missing required --{key}")))
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Solver(String),
    Io(io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonConvergence { .. } | Error::BlowUp { .. } | Error::SingularPivot { .. } => Self::Solver(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::Io(e)
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `bangbang --help` for usage");
            EXIT_USAGE
        }
        Err(CliError::Solver(msg)) => {
            eprintln!("solver failure: {msg}");
            EXIT_NONCONVERGED
        }
        Err(CliError::Io(e)) => {
            eprintln!("i/o error: {e}");
            EXIT_IO
        }
    }
}

struct Context {
    settings: Settings,
    exec: Execution,
    seed: u64,
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    let settings = Settings::load(cli.config.as_deref())?;
    let jobs = settings.get(cli.jobs, "jobs")?.unwrap_or(1);
    let seed = settings.get(cli.seed, "seed")?.unwrap_or(0);
    let ctx = Context { settings, exec: Execution::from_jobs(jobs), seed };
    match cli.command {
        Command::Solve(a) => cmd_solve(&ctx, a),
        Command::Path(a) => cmd_path(&ctx, a, false),
        Command::Rates(a) => cmd_path(&ctx, a, true),
        Command::Asc(a) => cmd_asc(&ctx, a),
        Command::Gradcheck(a) => cmd_gradcheck(&ctx, a),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

struct ProblemSpec {
    name: NamedProblem,
    beta: Option<f64>,
    cells: usize,
    out: Option<PathBuf>,
}

fn problem_spec(s: &Settings, c: Common, default_cells: usize) -> Result<ProblemSpec, CliError> {
    let name: String = s.required(c.problem, "problem")?;
    Ok(ProblemSpec {
        name: name.parse()?,
        beta: s.get(c.beta, "beta")?,
        cells: s.get(c.cells, "cells")?.unwrap_or(default_cells),
        out: s.get(c.out, "out")?,
    })
}

fn optimizer_options(s: &Settings, tol: Option<f64>, max_outer: Option<usize>, fixed_point: bool) -> Result<OptimizerOptions, CliError> {
    let mut o = OptimizerOptions::default();
    if let Some(t) = s.get(tol, "tol")? {
        if !(t > 0.0) {
            return Err(CliError::Usage(format!("--tol must be positive, got {t}")));
        }
        o.tol = t;
    }
    if let Some(m) = s.get(max_outer, "max-outer")? {
        o.max_outer = m;
    }
    o.fixed_point = s.flag(fixed_point, "fixed-point")?;
    Ok(o)
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    problem: String,
    cells: usize,
    alpha: f64,
    beta: f64,
    converged: bool,
    stationarity: f64,
    objective_value: f64,
    outer_iters: usize,
    newton_iters: usize,
    #[serde(rename = "err_u_L2")]
    err_u_l2: f64,
    #[serde(rename = "err_u_L1")]
    err_u_l1: f64,
    u: &'a [f64],
    y: &'a [f64],
    p: &'a [f64],
}

fn cmd_solve(ctx: &Context, a: SolveArgs) -> Result<i32, CliError> {
    let s = &ctx.settings;
    let spec = problem_spec(s, a.common, 1024)?;
    let alpha: f64 = s.required(a.alpha, "alpha")?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(CliError::Usage(format!("--alpha must be positive, got {alpha}")));
    }
    let opts = optimizer_options(s, a.tol, a.max_outer, a.fixed_point)?;
    let (problem, exact) = spec.name.build(spec.cells, spec.beta)?;
    let sol = solve_regularized(&problem, alpha, None, &opts)?;
    let doc = SolveOutput {
        problem: spec.name.to_string(),
        cells: spec.cells,
        alpha,
        beta: problem.beta(),
        converged: sol.converged,
        stationarity: sol.stationarity,
        objective_value: sol.objective_value,
        outer_iters: sol.outer_iters,
        newton_iters: sol.newton_iters,
        err_u_l2: exact.u_bar_exact.distance(&sol.u, Norm::L2),
        err_u_l1: exact.u_bar_exact.distance(&sol.u, Norm::L1),
        u: sol.u.values(),
        y: sol.y.values(),
        p: sol.p.values(),
    };
    let mut out = output(spec.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &doc).map_err(io::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(if sol.converged { EXIT_OK } else { EXIT_NONCONVERGED })
}

fn cmd_path(ctx: &Context, a: PathArgs, rates: bool) -> Result<i32, CliError> {
    let s = &ctx.settings;
    let spec = problem_spec(s, a.common, 8192)?;
    if rates && spec.out.is_none() {
        return Err(CliError::Usage("rates requires --out".into()));
    }
    let alpha_max = s.get(a.alpha_max, "alpha-max")?.unwrap_or(1e-1);
    let alpha_min = s.get(a.alpha_min, "alpha-min")?.unwrap_or(1e-5);
    let per_decade = s.get(a.per_decade, "per-decade")?.unwrap_or(3);
    let alphas = log_grid(alpha_max, alpha_min, per_decade)?;
    let cold = s.flag(a.cold, "cold")?;
    let mode = if cold { PathMode::Cold(ctx.exec) } else { PathMode::WarmStart };
    let opts = optimizer_options(s, a.tol, a.max_outer, false)?;
    let (problem, exact) = spec.name.build(spec.cells, spec.beta)?;
    let mut out = output(spec.out.as_deref())?;

    if rates {
        let mut table = rate_sweep(&problem, &exact, &alphas, &SweepOptions { optimizer: opts, mode, ..Default::default() })?;
        table.notes.push(format!("problem={}", spec.name));
        table.notes.push(format!("cells={}", spec.cells));
        if spec.name.is_sparse() {
            table.notes.push("note=sparse variant is an extrapolation with no reference experiment".into());
        }
        table.write_csv(&mut out)?;
        out.flush()?;
        return Ok(if table.all_converged() { EXIT_OK } else { EXIT_NONCONVERGED });
    }

    let path = solve_path(&problem, &alphas, &opts, mode)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut out);
    w.write_record(["alpha", "objective", "stationarity", "outer_iters", "converged", "err_u_L2"]).map_err(io::Error::from)?;
    let mut all_ok = true;
    for (alpha, sol) in alphas.iter().zip(&path) {
        let rec = match sol {
            Ok(r) => {
                all_ok &= r.converged;
                [
                    fmt(*alpha),
                    fmt(r.objective_value),
                    fmt(r.stationarity),
                    r.outer_iters.to_string(),
                    r.converged.to_string(),
                    fmt(exact.u_bar_exact.distance(&r.u, Norm::L2)),
                ]
            }
            Err(e) => {
                all_ok = false;
                eprintln!("alpha={alpha:e}: {e}");
                [fmt(*alpha), fmt(f64::NAN), fmt(f64::NAN), "0".into(), "false".into(), fmt(f64::NAN)]
            }
        };
        w.write_record(rec).map_err(io::Error::from)?;
    }
    w.flush()?;
    drop(w);
    out.flush()?;
    Ok(if all_ok { EXIT_OK } else { EXIT_NONCONVERGED })
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn cmd_asc(ctx: &Context, a: AscArgs) -> Result<i32, CliError> {
    let s = &ctx.settings;
    let spec = problem_spec(s, a.common, 8192)?;
    let out_path = spec.out.clone().ok_or_else(|| CliError::Usage("asc requires --out".into()))?;
    let eps_min = s.get(a.eps_min, "eps-min")?.unwrap_or(1e-3);
    let eps_max = s.get(a.eps_max, "eps-max")?.unwrap_or(0.3);
    let count = s.get(a.eps_count, "eps-count")?.unwrap_or(20);
    if !(eps_min > 0.0 && eps_max > eps_min && count >= 2) {
        return Err(CliError::Usage(format!("invalid epsilon range [{eps_min}, {eps_max}] x {count}")));
    }
    let eps = if (eps_min, eps_max, count) == (1e-3, 0.3, 20) {
        default_epsilons()
    } else {
        crate::harness::asc::log_spaced(eps_min, eps_max, count)
    };
    let (_, exact) = spec.name.build(spec.cells, spec.beta)?;
    let level = spec.beta.unwrap_or(exact.level);
    let report = asc_sweep(&exact.p_bar, level, &eps, ctx.exec)?;
    let mut out = output(Some(&out_path))?;
    report.write_csv(&mut out)?;
    out.flush()?;
    Ok(EXIT_OK)
}

fn cmd_gradcheck(ctx: &Context, a: GradArgs) -> Result<i32, CliError> {
    let s = &ctx.settings;
    let spec = problem_spec(s, a.common, 256)?;
    let points = s.get(a.points, "points")?.unwrap_or(10);
    let directions = s.get(a.directions, "directions")?.unwrap_or(5);
    let alpha = s.get(a.alpha, "alpha")?.unwrap_or(0.0);
    if !(alpha >= 0.0) {
        return Err(CliError::Usage(format!("--alpha must be >= 0, got {alpha}")));
    }
    let (problem, _) = spec.name.build(spec.cells, spec.beta)?;
    let hs: Vec<f64> = (1..=9).map(|k| 10f64.powi(-k)).collect();
    let rows = gradient_check_random(&problem, alpha, points, directions, &hs, ctx.seed, ctx.exec)?;
    let mut out = output(spec.out.as_deref())?;
    write_gradient_csv(&rows, &mut out)?;
    out.flush()?;
    let worst = best_per_direction(&rows).into_iter().fold(0.0_f64, f64::max);
    log::info!("worst best-case relative error {worst:e}");
    Ok(EXIT_OK)
}
