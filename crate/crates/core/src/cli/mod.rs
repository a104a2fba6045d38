//! Command-line experiment runner.

pub mod commands;
pub mod config;
pub mod plot;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use commands::RunContext;
use config::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(name = "spin-ensemble", version, about = "Collective spin ensembles under local decoherence")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// key = value parameter file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Also write SVG figures
    #[arg(long, global = true)]
    pub plot: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Closed-form vs integrated irrep populations
    Populations,
    /// Wigner rasters of a single excitation in both pictures
    Fig3,
    /// Trajectory fourth moment vs the moment equation
    Fig4,
    /// Exact vs bosonic QFI
    Fig5,
    /// Second moment for a generic local channel
    AppendixD,
    /// Cross-validation against the full-space solver
    Oracle,
}

impl Command {
    fn keys(self) -> &'static [&'static str] {
        match self {
            Command::Populations => commands::POPULATIONS_KEYS,
            Command::Fig3 => commands::FIG3_KEYS,
            Command::Fig4 => commands::FIG4_KEYS,
            Command::Fig5 => commands::FIG5_KEYS,
            Command::AppendixD => commands::APPENDIX_D_KEYS,
            Command::Oracle => commands::ORACLE_KEYS,
        }
    }
}

/// Process exit code for an error: 2 for invalid input, 3 for numerical
/// failure, 1 for I/O.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Parse(_) => 2,
        Error::Integrator { .. } | Error::Truncation { .. } | Error::Numerical(_) => 3,
        Error::Io(_) | Error::Csv(_) => 1,
    }
}

/// Run one command and return its summary lines.
pub fn run(cli: &Cli) -> Result<Vec<String>> {
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p, cli.command.keys())?,
        None => ExperimentConfig::default(),
    };
    commands::ensure_dir(&cli.out)?;
    let ctx = RunContext { out: cli.out.clone(), seed: cli.seed, plot: cli.plot };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Domain("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Populations => commands::cmd_populations(&cfg, &ctx),
        Command::Fig3 => commands::cmd_fig3(&cfg, &ctx),
        Command::Fig4 => commands::cmd_fig4(&cfg, &ctx),
        Command::Fig5 => commands::cmd_fig5(&cfg, &ctx),
        Command::AppendixD => commands::cmd_appendix_d(&cfg, &ctx),
        Command::Oracle => commands::cmd_oracle(&cfg, &ctx),
    })
}
