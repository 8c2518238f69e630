use std::path::PathBuf;
use std::process::ExitCode;

use anomalykit_cli::{commands, config, verify, CliError};
use anyhow::Context;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "anomalykit", version, about = "Chemotaxis anomaly experiments")]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(short, long, global = true, default_value = "configs/default.toml")]
    config: PathBuf,
    /// Override a configuration key, e.g. `--set grid.nx=32`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,
    /// Worker threads (defaults to all cores).
    #[arg(short, long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the forward problem and write its boundary measurements.
    Forward {
        /// Solve the stationary system instead.
        #[arg(long)]
        stationary: bool,
    },
    /// Solve the linearized cascade and check finite-difference slopes.
    Linearize,
    /// Evaluate CGO corner asymptotics.
    Probe,
    /// Reconstruct the inclusion and recover boundary coefficients.
    Invert {
        /// Measurement JSON; simulated from the configured inclusion if absent.
        #[arg(long)]
        observed: Option<PathBuf>,
    },
    /// Run the acceptance suite.
    Verify {
        /// Comma-separated criterion ids.
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let cfg = config::load(&cli.config, &cli.sets)?;
    let manifest = match cli.command {
        Command::Forward { stationary } => commands::run_forward(&cfg, stationary)?,
        Command::Linearize => commands::run_linearize(&cfg)?,
        Command::Probe => commands::run_probe_command(&cfg)?,
        Command::Invert { observed } => commands::run_invert(&cfg, observed.as_deref())?,
        Command::Verify { only } => {
            let report = verify::run_verify(&cfg, &only)?;
            for o in &report.outcomes {
                println!(
                    "criterion {:>2} {:<28} {} ({:.2} s)",
                    o.id,
                    o.name,
                    if o.pass { "PASS" } else { "FAIL" },
                    o.seconds
                );
            }
            if !report.all_pass() {
                return Ok(ExitCode::from(3));
            }
            report.manifest
        }
    };
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    for c in manifest.checks.iter().filter(|c| !c.pass) {
        eprintln!("check failed: {}", c.name);
    }
    println!("wrote {} artifacts ({})", manifest.artifacts.len(), manifest.command);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CliError>().map_or(2, CliError::exit_code);
            ExitCode::from(code)
        }
    }
}
