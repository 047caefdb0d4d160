use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use phaseflow::config::parse_config;
use phaseflow::runner::{self, exit_code, RunOptions};

#[derive(Parser)]
#[command(
    name = "phaseflow",
    version,
    about = "Phase-field trajectories, steady states and long-time diagnostics"
)]
struct Cli {
    /// Output directory (falls back to $PHASEFLOW_OUT, then output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for the oracle multi-start.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate an experiment and run its diagnostics.
    Run { config: PathBuf },
    /// Solve for stationary states from the configured guesses.
    Steady { config: PathBuf },
    /// Fit the decay of stored snapshots towards a steady state.
    Fit { trace: PathBuf, steady: PathBuf },
    /// Run one experiment per value of a config key.
    Sweep {
        config: PathBuf,
        key: String,
        #[arg(required = true)]
        values: Vec<String>,
    },
    /// Check a configuration and the model hypotheses.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions {
        out: cli.out,
        threads: cli.threads,
        seed: cli.seed,
        quiet: cli.quiet,
    };
    let result = match &cli.command {
        Command::Run { config } => parse_config(config)
            .and_then(|c| runner::run_experiment(&c, &opts))
            .map(|o| o.exit_code()),
        Command::Steady { config } => parse_config(config)
            .and_then(|c| runner::run_steady(&c, &opts))
            .map(|o| o.exit_code()),
        Command::Fit { trace, steady } => runner::run_fit(trace, steady, &opts).map(|o| o.exit_code()),
        Command::Sweep { config, key, values } => parse_config(config)
            .and_then(|c| runner::run_sweep(&c, key, values, &opts))
            .map(|members| members.iter().map(|m| m.exit_code()).max().unwrap_or(0)),
        Command::Validate { config } => runner::validate_config(config, &opts).map(|o| o.exit_code()),
    };
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("phaseflow: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
