//! `exclt`: simulate scenarios, run convergence checks and verify the Gaussian
//! scale mixture identity.
//!
//! Exit codes: 0 pass, 1 runtime failure, 2 configuration error, 3 criterion
//! failed, 4 inconclusive.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use exclt_core::mixture::verify_example1;
use exclt_core::{builtin, run_criterion, run_scenario, Criterion, Verdict, BUILTIN_SCENARIOS};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] exclt_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if e.is_config() => 2,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "exclt",
    version,
    about = "Limit laws of normed row sums of exchangeable arrays"
)]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// TOML scenario file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Builtin scenario name, instead of --config.
    #[arg(long)]
    scenario: Option<String>,
    /// Overrides EXCLT_SEED and the file's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a scenario and write its report and CSV tables.
    Simulate(ScenarioArgs),
    /// Run one named criterion and write its verdict.
    Check {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        criterion: String,
    },
    /// Check the Gaussian scale mixture identity for the Cauchy c.f.
    VerifyIdentity {
        /// Largest accepted residual.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, hide = true, default_value_t = 1.0)]
        perturb: f64,
    },
    /// Print the builtin scenarios and their criteria.
    ListScenarios,
}

fn cmd_simulate(args: &ScenarioArgs) -> Result<u8, CliError> {
    let config = config::load(args.config.as_deref(), args.scenario.as_deref(), args.seed)?;
    let report = run_scenario(&config)?;
    let files = output::write_report(&report, &args.out)?;
    for (n, d) in &report.sup_distance {
        println!("n = {n:>8}  sup |cf - target| = {d:.5}");
    }
    for v in &report.verdicts {
        println!("{:<18} {:?}", v.name, v.holds);
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(0)
}

fn cmd_check(args: &ScenarioArgs, criterion: &str) -> Result<u8, CliError> {
    let criterion: Criterion = criterion.parse()?;
    let config = config::load(args.config.as_deref(), args.scenario.as_deref(), args.seed)?;
    let verdict = run_criterion(criterion, &config)?;
    let path = output::write_verdict(&config, criterion, &verdict, &args.out)?;
    println!("{} on {}: {:?}", criterion, config.name, verdict.holds);
    for s in &verdict.evidence {
        println!("  {:<40} {:?}", s.name, s.verdict);
    }
    println!("wrote {}", path.display());
    Ok(match verdict.holds {
        Verdict::Pass => 0,
        Verdict::Fail => 3,
        Verdict::Inconclusive => 4,
    })
}

fn cmd_verify_identity(tol: f64, perturb: f64) -> Result<u8, CliError> {
    if !(tol > 0.0) {
        return Err(CliError::Config(format!("--tol {tol} must be positive")));
    }
    let check = verify_example1(tol.min(1e-10), perturb)?;
    println!(
        "max residual {:.3e} over {} points (tolerance {tol:e})",
        check.max_residual,
        check.points.len()
    );
    if check.max_residual <= tol {
        Ok(0)
    } else {
        Err(CliError::Runtime(format!(
            "residual {:.3e} exceeds {tol:e}",
            check.max_residual
        )))
    }
}

fn cmd_list_scenarios() -> Result<u8, CliError> {
    for name in BUILTIN_SCENARIOS {
        let config = builtin(name, 0).expect("builtin exists");
        let criteria: Vec<&str> = config.criteria.iter().map(|c| c.as_str()).collect();
        println!("{name:<14} {}", criteria.join(" "));
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Check {
            scenario,
            criterion,
        } => cmd_check(scenario, criterion),
        Command::VerifyIdentity { tol, perturb } => cmd_verify_identity(*tol, *perturb),
        Command::ListScenarios => cmd_list_scenarios(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("exclt: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
