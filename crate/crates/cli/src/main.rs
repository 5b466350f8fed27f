//! `bilinear`: batch front end for propagation, energy certificates,
//! Galerkin sweeps, resonant steering and the verification suites.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 numerical
//! failure, 4 certificate or verification check failed.

mod commands;
mod output;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use bilinear_core::verify::DEFAULT_SEED;
use bilinear_core::{Error, Result};
use clap::{Parser, Subcommand};

use commands::Outcome;
use scenario::Scenario;

#[derive(Parser)]
#[command(name = "bilinear", version, about = "Bilinear quantum control on Galerkin compressions")]
struct Cli {
    /// Directory receiving output artifacts.
    #[arg(long, global = true, env = "BILINEAR_OUT", default_value = ".")]
    out: PathBuf,
    /// Seed for randomized inputs; overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, 0 for one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate a scenario; writes trajectory.csv and summary.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Certify the energy-growth bound; writes certificate.json, exits 4 on failure.
    Estimate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Galerkin deviation against a reference order; writes sweep.csv and summary.json.
    GalerkinSweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Resonant steering along an edge or chain; writes steer.csv and steer.json.
    Steer {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run verification suites; writes verify.json, exits 4 if a check fails.
    Verify {
        /// Suites to run; all when omitted.
        suites: Vec<String>,
        /// Print suite names and exit.
        #[arg(long)]
        list: bool,
    },
    /// List or export built-in models.
    Models {
        #[command(subcommand)]
        action: ModelsAction,
    },
}

#[derive(Subcommand)]
enum ModelsAction {
    /// Print built-in model names.
    List,
    /// Write `<name>.json`, as a closed form or as an `--n` mode table.
    Export {
        name: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<i32> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| Error::Argument(format!("thread pool: {e}")))?;
    }
    let outcome: Outcome = match cli.command {
        Command::Simulate { config } => commands::simulate(&Scenario::load(&config, cli.seed)?, &cli.out)?,
        Command::Estimate { config } => commands::estimate(&Scenario::load(&config, cli.seed)?, &cli.out)?,
        Command::GalerkinSweep { config } => commands::sweep(&Scenario::load(&config, cli.seed)?, &cli.out)?,
        Command::Steer { config } => commands::steer(&Scenario::load(&config, cli.seed)?, &cli.out)?,
        Command::Verify { suites, list } => {
            if list {
                for line in commands::list_suites() {
                    println!("{line}");
                }
                return Ok(0);
            }
            commands::verify(&suites, cli.seed.unwrap_or(DEFAULT_SEED), &cli.out)?
        }
        Command::Models { action } => match action {
            ModelsAction::List => {
                for name in commands::list_models() {
                    println!("{name}");
                }
                return Ok(0);
            }
            ModelsAction::Export { name, n, nu, a, eta } => commands::export_model(&name, n, (nu, a, eta), &cli.out)?,
        },
    };
    for line in &outcome.report {
        println!("{line}");
    }
    for path in outcome.artifacts.commit()? {
        eprintln!("wrote {}", path.display());
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
