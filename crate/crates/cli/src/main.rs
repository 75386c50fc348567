mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "dustflow",
    version,
    about = "Relativistic dust on expanding backgrounds: blowup, life spans, cross-checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "DUSTFLOW_OUT", default_value = "dustflow-out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for randomized sampling; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Sample positions, velocities, det and density along characteristics.
    Simulate,
    /// Blowup time and life-span bound for each epsilon.
    Sweep,
    /// Grid search for the first singularity of the flow map.
    Blowup,
    /// Finite-volume solver against the characteristic solution.
    OracleCompare,
    /// Blowup rates of spherically symmetric flow.
    Spherical,
    /// Regime, epsilon thresholds and life-span bound.
    Thresholds,
}

fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let cfg = ExperimentConfig::load(path)?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = cli.jobs {
        if k == 0 {
            return Err(CliError::Config("--jobs must be positive".into()));
        }
        pool = pool.num_threads(k);
    }
    let pool = pool.build().map_err(|e| CliError::Run(format!("thread pool: {e}")))?;
    let artifacts = pool.install(|| match cli.command {
        Command::Simulate => commands::simulate(&cfg, seed),
        Command::Sweep => commands::sweep(&cfg),
        Command::Blowup => commands::blowup(&cfg),
        Command::OracleCompare => commands::oracle_compare(&cfg),
        Command::Spherical => commands::spherical(&cfg),
        Command::Thresholds => commands::thresholds(&cfg),
    })?;
    output::write_all(&cli.out, &artifacts)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("dustflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
