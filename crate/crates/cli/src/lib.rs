//! Command-line driver: configuration parsing, run orchestration and
//! persistence of spectra, manifests and reports.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::verify::VerifyArgs;
use commands::Globals;
use config::RawConfig;
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "bht",
    version,
    about = "Passive-tracer spectra on the periodic torus"
)]
pub struct Cli {
    /// Seed override: velocity.seed, ensemble.base_seed or verify.seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for ensembles.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write one velocity realization as CSV and binary coefficient tables.
    GenVelocity {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve one realization through the low/high-mode decomposition.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a Monte Carlo ensemble.
    Ensemble {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the inequality and kernel suite.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated check ids.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
        /// Constants baseline to compare against.
        #[arg(long, conflicts_with = "no_baseline")]
        baseline: Option<PathBuf>,
        #[arg(long)]
        no_baseline: bool,
        /// Write the measured constants as a new baseline.
        #[arg(long)]
        write_baseline: Option<PathBuf>,
    },
    /// Emit log-log tables with reference lines for an ensemble run.
    Report { run_dir: PathBuf },
}

pub fn execute(cli: Cli) -> CliResult<manifest::Manifest> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    let globals = Globals {
        seed: cli.seed,
        out: cli.out,
    };
    match cli.command {
        Command::GenVelocity { config } => {
            commands::velocity::run(&commands::load_config(&config, &globals)?, &globals)
        }
        Command::Solve { config } => {
            commands::solve::run(&commands::load_config(&config, &globals)?, &globals)
        }
        Command::Ensemble { config } => {
            commands::ensemble::run(&commands::load_config(&config, &globals)?, &globals)
        }
        Command::Verify {
            config,
            only,
            baseline,
            no_baseline,
            write_baseline,
        } => {
            let raw = match config {
                Some(p) => commands::load_config(&p, &globals)?,
                None => RawConfig::default(),
            };
            let args = VerifyArgs {
                only,
                baseline,
                no_baseline,
                write_baseline,
            };
            commands::verify::run(&raw, &globals, &args)
        }
        Command::Report { run_dir } => commands::report::run(&run_dir, &globals),
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(m) => {
            eprintln!(
                "{} run {} written ({} files)",
                m.command,
                m.run_id,
                m.files.len()
            );
            0
        }
        Err(e) => {
            eprintln!("bht: {e}");
            e.exit_code()
        }
    }
}
