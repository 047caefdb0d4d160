//! Drives a whole experiment from a configuration file, as the `phaseflow
//! run` subcommand does. Pass a path, or the shipped equilibrium file is
//! used.

use std::path::PathBuf;

use phaseflow::config::parse_config;
use phaseflow::runner::{run_experiment, RunOptions};

fn main() -> phaseflow::Result<()> {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/equilibrium.cfg"));
    let cfg = parse_config(&path)?;
    let opts = RunOptions {
        out: Some(std::env::temp_dir().join("phaseflow_example")),
        threads: None,
        seed: 0,
        quiet: true,
    };
    let outcome = run_experiment(&cfg, &opts)?;
    for a in &outcome.assertions {
        println!(
            "{:<20} {}  {}",
            a.name,
            if a.passed { "ok" } else { "FAILED" },
            a.detail
        );
    }
    println!("files in {}", outcome.out_dir.display());
    Ok(())
}
