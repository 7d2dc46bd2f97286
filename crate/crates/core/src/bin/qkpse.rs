// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qkpse::runner::{self, RunError};

#[derive(Parser)]
#[command(name = "qkpse", version, about = "Phase-space Monte Carlo estimation of bosonic quantum kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config and write a JSON-lines report.
    Run {
        config: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Report path; overrides `output` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Flatten a report into CSV for plotting.
    Plot {
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Run { config, threads, out } => {
            if let Some(n) = threads {
                if n == 0 {
                    return Err(RunError::Validation("--threads must be at least 1".into()));
                }
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| RunError::Runtime(e.to_string()))?;
            }
            let seed = runner::seed_override_from_env()?;
            let path = runner::run(&config, out.as_deref(), seed)?;
            eprintln!("wrote {}", path.display());
        }
        Command::Plot { report, out } => {
            let n = runner::emit_plot_data(&report, &out)?;
            eprintln!("wrote {n} rows to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
