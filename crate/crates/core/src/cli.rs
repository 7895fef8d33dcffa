//! The `clmm` command line: ingest, solve, evaluate, report.
//!
//! Exit codes: 0 success, 1 solver did not converge, 2 input error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::game::{AtomicProfile, GameSpec};
use crate::pipeline::{build_daily_game, GameOptions, PoolData, REACTIVE_FLUCTUATION};
use crate::solver::{kkt_residuals, solve_ne, structure_checks, waterfill_check, SolverOptions};
use crate::strategies::{
    parse_report_csv, parse_strategies, report_csv, run_strategy_suite, summary_json, StrategyKind, SuiteConfig,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Default inert-game expansion factor when neither the flag nor the pool header sets one.
pub const DEFAULT_EXPANSION: f64 = 2.0;

#[derive(Debug, Parser)]
#[command(name = "clmm", version, about = "Liquidity provision games on concentrated-liquidity AMMs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build one game and ground-truth profile per day from a pool directory.
    Ingest(IngestArgs),
    /// Solve a game for its Nash equilibrium and verify its structure.
    Solve(SolveArgs),
    /// Score the strategy suite on every day of a pool.
    Evaluate(EvaluateArgs),
    /// Summarize a report CSV per strategy.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct PoolArgs {
    /// Pool directory with pool.json, prices.csv and events.csv or events.jsonl.
    #[arg(long)]
    pub pool: PathBuf,
    /// First day to include (YYYY-MM-DD).
    #[arg(long)]
    pub from: Option<NaiveDate>,
    /// Last day to include (YYYY-MM-DD).
    #[arg(long)]
    pub to: Option<NaiveDate>,
    /// Fee-share exponent used instead of 1.
    #[arg(long)]
    pub alpha_override: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Relaxation damping in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub omega: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    /// KKT residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Seed of every random choice (solver initialization).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SolverArgs {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            damping: self.omega,
            max_iters: self.max_iters,
            tol_kkt: self.tol,
            seed: self.seed,
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub pool: PoolArgs,
    /// Output root; files go under <out>/<pool name>/<date>/.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// GameSpec JSON file.
    #[arg(long)]
    pub spec: PathBuf,
    /// Directory for equilibrium.json and verification.json; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Profile JSON to certify instead of solving (with --check-only).
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Only report KKT residuals of --profile.
    #[arg(long, requires = "profile")]
    pub check_only: bool,
    #[arg(long)]
    pub alpha_override: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub pool: PoolArgs,
    /// Directory for report.csv, summary.json and manifest.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated strategies (gt,ne,br,yday,rne,ine,ibr,neall) or `all`.
    #[arg(long, default_value = "all")]
    pub strategies: String,
    /// Inert-game expansion factor (defaults to the pool header's, else 2).
    #[arg(long)]
    pub expansion: Option<f64>,
    /// Reactive-game price fluctuation factor.
    #[arg(long, default_value_t = REACTIVE_FLUCTUATION)]
    pub fluctuation: f64,
    /// Worker threads across days.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Report CSV written by `evaluate`.
    #[arg(long)]
    pub input: PathBuf,
    /// Summary JSON path; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Ingest(a) => cmd_ingest(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Report(a) => cmd_report(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("value serializes")
}

fn load_pool(args: &PoolArgs) -> Result<PoolData> {
    let pool = PoolData::load(&args.pool)?;
    if !pool.log.issues.is_empty() {
        for issue in &pool.log.issues {
            eprintln!("line {}: {}", issue.line, issue.message);
        }
        let first = &pool.log.issues[0];
        return Err(Error::Parse { line: first.line, message: format!("{} ({} malformed row(s))", first.message, pool.log.issues.len()) });
    }
    if let Some(a) = args.alpha_override {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::InvalidGame(vec![format!("alpha out of (0,1]: {a}")]));
        }
    }
    Ok(pool)
}

fn in_range(args: &PoolArgs, date: NaiveDate) -> bool {
    args.from.is_none_or(|f| date >= f) && args.to.is_none_or(|t| date <= t)
}

pub fn cmd_ingest(args: &IngestArgs) -> Result<i32> {
    let pool = load_pool(&args.pool)?;
    let root = args.out.join(&pool.header.name);
    let opts = GameOptions { alpha: args.pool.alpha_override, extra_ticks: vec![] };
    let mut days = Vec::new();
    let mut warnings = Vec::new();
    if pool.log.events.is_empty() {
        warnings.push("events file is empty".to_string());
    }
    for day in pool.days().iter().filter(|d| in_range(&args.pool, d.date)) {
        match build_daily_game(&pool, day, &opts)? {
            Ok(g) => {
                let dir = root.join(day.date.to_string());
                write(&dir.join("spec.json"), &g.spec.to_json())?;
                write(&dir.join("gt.json"), &g.gt.to_json(&g.spec))?;
                warnings.extend(g.warnings.iter().cloned());
                days.push(json!({
                    "date": day.date.to_string(),
                    "players": g.spec.num_players(),
                    "ranges": g.spec.num_ranges(),
                    "retained_budget_fraction": g.retained_fraction,
                    "imputed_ranges": g.imputed.iter().filter(|&&u| u).count(),
                }));
            }
            Err(w) => warnings.extend(w),
        }
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let manifest = json!({
        "tool": "clmm",
        "version": VERSION,
        "pool": pool.header.name,
        "gamma": pool.header.gamma,
        "days": days,
        "warnings": warnings,
    });
    write(&root.join("manifest.json"), &pretty(&manifest))?;
    Ok(EXIT_OK)
}

pub fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let mut data: crate::game::GameSpecData = serde_json::from_str(&fs::read_to_string(&args.spec)?)?;
    if let Some(a) = args.alpha_override {
        data.alpha = a;
    }
    let spec = GameSpec::from_data(data)?;
    let opts = args.solver.options();
    opts.validate()?;

    if args.check_only {
        let path = args.profile.as_ref().expect("clap enforces --profile");
        let profile = AtomicProfile::from_json(&fs::read_to_string(path)?)?;
        profile.check_feasible(&spec)?;
        let cert = kkt_residuals(&spec, &profile);
        let report = json!({
            "version": VERSION,
            "lambda": cert.lambda,
            "mu": cert.mu,
            "residuals": cert.residuals,
            "certified": cert.residuals.max() <= opts.tol_kkt,
        });
        emit(args.out.as_deref(), "kkt.json", &pretty(&report))?;
        return Ok(EXIT_OK);
    }

    let result = solve_ne(&spec, &opts)?;
    let tol = 1e-6;
    let verification = json!({
        "version": VERSION,
        "converged": result.converged,
        "last_step": result.last_step,
        "damping": result.damping,
        "utilities": result.utilities(&spec),
        "waterfill": waterfill_check(&spec, &result, tol),
        "structure": structure_checks(&spec, &result, tol),
    });
    match &args.out {
        Some(dir) => {
            write(&dir.join("equilibrium.json"), &result.to_json())?;
            write(&dir.join("verification.json"), &pretty(&verification))?;
        }
        None => println!("{}", pretty(&json!({ "equilibrium": result.to_data(), "verification": verification }))),
    }
    if result.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "error: no convergence after {} iterations (last step {:e}, KKT residual {:e})",
            result.iterations,
            result.last_step,
            result.residuals.max()
        );
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn emit(dir: Option<&Path>, name: &str, text: &str) -> Result<()> {
    match dir {
        Some(d) => write(&d.join(name), text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<i32> {
    let pool = load_pool(&args.pool)?;
    let strategies: Vec<StrategyKind> = parse_strategies(&args.strategies).map_err(|e| Error::InvalidGame(vec![e]))?;
    let opts = args.solver.options();
    opts.validate()?;
    let game = GameOptions { alpha: args.pool.alpha_override, extra_ticks: vec![] };
    let (days, mut warnings) = crate::pipeline::build_all_days(&pool, &game)?;
    let config = SuiteConfig {
        strategies,
        solver: opts,
        game,
        expansion: args.expansion.or(pool.header.expansion).unwrap_or(DEFAULT_EXPANSION),
        fluctuation: args.fluctuation,
        jobs: args.jobs,
        from: args.pool.from,
        to: args.pool.to,
    };
    let report = run_strategy_suite(&pool, &days, &config)?;
    write(&args.out.join("report.csv"), &report_csv(&report.rows)?)?;
    write(&args.out.join("summary.json"), &summary_json(&report.rows))?;
    warnings.retain(|w| {
        let date = w.split(':').next().and_then(|d| d.parse::<NaiveDate>().ok());
        date.is_none_or(|d| in_range(&args.pool, d))
    });
    let manifest = json!({
        "tool": "clmm",
        "version": VERSION,
        "pool": pool.header.name,
        "strategies": config.strategies,
        "expansion": config.expansion,
        "fluctuation": config.fluctuation,
        "seed": config.solver.seed,
        "rows": report.rows.len(),
        "absent": report.absent,
        "warnings": warnings,
    });
    write(&args.out.join("manifest.json"), &pretty(&manifest))?;
    Ok(EXIT_OK)
}

pub fn cmd_report(args: &ReportArgs) -> Result<i32> {
    let rows = parse_report_csv(&fs::read_to_string(&args.input)?)?;
    match &args.out {
        Some(path) => write(path, &summary_json(&rows))?,
        None => println!("{}", summary_json(&rows)),
    }
    Ok(EXIT_OK)
}
