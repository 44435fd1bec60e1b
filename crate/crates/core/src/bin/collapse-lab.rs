// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use collapse_lab::io::{self, Subcommand};
use collapse_lab::{Error, PhysicalConstants, Result};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Trajectory,
    MasterEq,
    Predict,
    Bounds,
    Interference,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Trajectory => Subcommand::Trajectory,
            Command::MasterEq => Subcommand::MasterEq,
            Command::Predict => Subcommand::Predict,
            Command::Bounds => Subcommand::Bounds,
            Command::Interference => Subcommand::Interference,
        }
    }
}

/// Numerical laboratory for spontaneous wavefunction-collapse models.
///
/// Physical constants come from the built-in table unless COLLAPSE_LAB_CONSTANTS names a
/// replacement file. Exit codes: 0 success, 2 configuration error, 3 numerical or I/O failure.
#[derive(Debug, Parser)]
#[command(name = "collapse-lab", version)]
struct Cli {
    #[arg(value_enum)]
    subcommand: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `workers`.
    #[arg(long)]
    workers: Option<usize>,
}

fn run(cli: &Cli) -> Result<io::RunManifest> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", cli.config.display())))?;
    let mut cfg = io::parse_config(&text)?;
    let wanted = Subcommand::from(cli.subcommand);
    if cfg.subcommand != wanted {
        return Err(Error::Config(format!(
            "config is for subcommand {}, not {}",
            cfg.subcommand.as_str(),
            wanted.as_str()
        )));
    }
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    cfg.validate()?;
    let consts = PhysicalConstants::load().map_err(|e| Error::Config(format!("constants: {e}")))?;
    io::execute(&cfg, &consts)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(manifest) => {
            print!("{}", io::describe(&manifest));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
