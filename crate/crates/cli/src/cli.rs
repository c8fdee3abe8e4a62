use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{self, Axis};
use crate::config::RunConfig;
use crate::error::{CliError, Status};

#[derive(Debug, Parser)]
#[command(name = "debound", version, about = "Quasi-minimizers of anisotropic energies and their L-infinity certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the admissibility conditions and print the derived exponents.
    Admissible {
        #[arg(long)]
        config: PathBuf,
    },
    /// Minimize the discrete energy and write the solution.
    Minimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the level-set iteration and write the certificate and traces.
    Certify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate every inequality report on a solution.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate admissibility along one exponent axis (`param=lo:hi:steps`).
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        axis: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(command: &Command, out: &mut dyn Write) -> Result<Status, CliError> {
    match command {
        Command::Admissible { config } => commands::admissible(&RunConfig::load(config)?, out),
        Command::Minimize { config, out: dir } => {
            let cfg = RunConfig::load(config)?;
            commands::minimize(&cfg, &cfg.output_dir(dir.as_deref()), out)
        }
        Command::Certify { config, solution, out: dir } => {
            let cfg = RunConfig::load(config)?;
            commands::certify_cmd(&cfg, solution, &cfg.output_dir(dir.as_deref()), out)
        }
        Command::Verify { config, solution, out: dir } => {
            let cfg = RunConfig::load(config)?;
            commands::verify_cmd(&cfg, solution, &cfg.output_dir(dir.as_deref()), out)
        }
        Command::Sweep { config, axis, out: dir } => {
            let axis = Axis::parse(axis)?;
            commands::sweep(&RunConfig::load(config)?, &axis, dir.as_deref(), out)
        }
    }
}

/// Runs one command, reporting failures on stderr.
pub fn run(command: &Command, out: &mut dyn Write) -> Status {
    match dispatch(command, out) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            e.status()
        }
    }
}
