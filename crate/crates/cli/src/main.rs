//! `fogpact`: solve, compare, sweep, and simulate linear payment plans for
//! fog-computing resource markets described by TOML config files.
//!
//! Exit codes: 0 success, 2 config/usage errors, 3 solver errors,
//! 4 simulation overflow. Every failure prints a single `error:` line.

mod config;
mod output;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fogpact_core::experiments::{self, EvaluationMode};
use fogpact_core::sim::{analytic_fn_utility, estimate_fn_utility};
use fogpact_core::solver::{plan_instance, solve_plan, BonusDim, PlanKind};
use fogpact_core::Error as CoreError;

use config::{build_instance, build_sim_config, build_sweep, load_document, parse_plan};
use output::{compare_csv, simulate_report_text, solve_report_text, SimulateView};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(CoreError),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                CoreError::Overflow(_) => 4,
                CoreError::SingularMatrix
                | CoreError::NotPsd
                | CoreError::NoConvergence(_)
                | CoreError::BadDimension { .. }
                | CoreError::InvalidPerturbation(_) => 3,
                _ => 2,
            },
        }
    }
}

#[derive(Parser)]
#[command(
    name = "fogpact",
    version,
    about = "Optimal linear payment plans for fog-computing resource markets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one payment plan and report the contract and utilities.
    Solve {
        /// TOML config describing the market instance.
        config: PathBuf,
        /// Payment plan to solve (defaults to the config's plan, then general).
        #[arg(long)]
        plan: Option<String>,
        /// Bonus coordinate for --plan single-bonus (default: best axis).
        #[arg(long)]
        dim: Option<usize>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve all six plans and write their ranking as CSV.
    Compare {
        config: PathBuf,
        /// Evaluation mode: own (default) or true.
        #[arg(long)]
        mode: Option<String>,
        /// Output CSV path (required).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the sweep described by the config's [sweep] section.
    Sweep {
        config: PathBuf,
        /// Output CSV path (required).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve a plan, simulate its noisy payoffs, and compare the sampled
    /// utility with the certainty-equivalent prediction.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        plan: Option<String>,
        #[arg(long)]
        dim: Option<usize>,
        /// Sample count (overrides the config's [sim] section).
        #[arg(long)]
        samples: Option<u64>,
        /// RNG seed (overrides the config's [sim] section).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("FOGPACT_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.parse().map_err(|_| {
        CliError::Config(format!("FOGPACT_THREADS must be a positive integer, got \"{raw}\""))
    })?;
    if threads == 0 {
        return Err(CliError::Config(
            "FOGPACT_THREADS must be a positive integer, got \"0\"".into(),
        ));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot configure thread pool: {e}")))
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Solve {
            config,
            plan,
            dim,
            output,
        } => cmd_solve(&config, plan.as_deref(), dim, output.as_deref()),
        Command::Compare {
            config,
            mode,
            output,
        } => {
            let output = output.ok_or_else(|| {
                CliError::Config("compare requires --output <path>".into())
            })?;
            cmd_compare(&config, mode.as_deref(), &output)
        }
        Command::Sweep { config, output } => {
            let output = output.ok_or_else(|| {
                CliError::Config("sweep requires --output <path>".into())
            })?;
            cmd_sweep(&config, &output)
        }
        Command::Simulate {
            config,
            plan,
            dim,
            samples,
            seed,
            output,
        } => cmd_simulate(&config, plan.as_deref(), dim, samples, seed, output.as_deref()),
    }
}

fn resolve_plan(
    plan_flag: Option<&str>,
    config_plan: Option<&str>,
    dim: Option<usize>,
) -> Result<PlanKind, CliError> {
    let label = plan_flag.or(config_plan).unwrap_or("general");
    let plan = parse_plan(label)?;
    match (plan, dim) {
        (PlanKind::SingleBonus(_), Some(i)) => Ok(PlanKind::SingleBonus(BonusDim::Index(i))),
        (other, Some(_)) => Err(CliError::Config(format!(
            "--dim only applies to --plan single-bonus (got {other})"
        ))),
        (plan, None) => Ok(plan),
    }
}

fn write_or_print(output: Option<&Path>, content: &str) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, content).map_err(|e| {
            CliError::Config(format!("cannot write {}: {e}", path.display()))
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_solve(
    config: &Path,
    plan_flag: Option<&str>,
    dim: Option<usize>,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let doc = load_document(config)?;
    let inst = build_instance(&doc.instance)?;
    let plan = resolve_plan(plan_flag, doc.plan.as_deref(), dim)?;
    let report = solve_plan(&inst, plan)?;
    write_or_print(output, &solve_report_text(&report))
}

fn cmd_compare(config: &Path, mode_flag: Option<&str>, output: &Path) -> Result<(), CliError> {
    let doc = load_document(config)?;
    let inst = build_instance(&doc.instance)?;
    let mode = match mode_flag {
        Some(raw) => raw.parse::<EvaluationMode>().map_err(CliError::Config)?,
        None => EvaluationMode::OwnInstance,
    };
    let ranked = experiments::rank_plans(&inst, mode)?;
    let details: Vec<(PlanKind, f64, f64)> = PlanKind::all()
        .iter()
        .map(|&plan| {
            experiments::solve_in_mode(&inst, plan, mode)
                .map(|r| (plan, r.fn_ce, r.welfare))
        })
        .collect::<Result<_, _>>()?;
    fs::write(output, compare_csv(&ranked, &details))
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", output.display())))
}

fn cmd_sweep(config: &Path, output: &Path) -> Result<(), CliError> {
    let doc = load_document(config)?;
    let inst = build_instance(&doc.instance)?;
    let section = doc.sweep.as_ref().ok_or_else(|| {
        CliError::Config("config has no [sweep] section".into())
    })?;
    let spec = build_sweep(inst, section, None)?;
    let result = experiments::run_sweep(&spec)?;
    experiments::emit_csv(&result, output).map_err(CliError::Core)
}

fn cmd_simulate(
    config: &Path,
    plan_flag: Option<&str>,
    dim: Option<usize>,
    samples: Option<u64>,
    seed: Option<u64>,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let doc = load_document(config)?;
    let inst = build_instance(&doc.instance)?;
    let plan = resolve_plan(plan_flag, doc.plan.as_deref(), dim)?;
    let sim_config = build_sim_config(doc.sim.as_ref(), samples, seed)?;

    let report = solve_plan(&inst, plan)?;
    // variants are paid out on the market they were solved for
    let market = plan_instance(&inst, plan);
    let result = estimate_fn_utility(&market, &report.contract, &report.effort, sim_config)?;
    let analytic_utility = analytic_fn_utility(&market, &report.contract, &report.effort)?;
    let view = SimulateView {
        plan: report.plan,
        config: sim_config,
        result: &result,
        analytic_utility,
        analytic_ce: report.fn_ce,
        eta: market.eta(),
    };
    write_or_print(output, &simulate_report_text(&view))
}
