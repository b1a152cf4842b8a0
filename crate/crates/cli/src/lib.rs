//! Front end for `martinet-core`: reads a TOML spec file, runs one analysis
//! and writes `report.json` (plus CSV files) to an output directory.

pub mod commands;
pub mod report;
pub mod specfile;

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;

pub use commands::{build, execute, Output};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: unparsable spec, out-of-range parameter, violated precondition.
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] martinet_core::Error),
    #[error(transparent)]
    Internal(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_PRECONDITION,
            CliError::Core(martinet_core::Error::Integration(_)) => EXIT_INTERNAL,
            CliError::Core(_) => EXIT_PRECONDITION,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Martinet function, Σ, tangency locus; planar singular points.
    Analyze,
    /// Strata of the points listed in the spec file.
    Classify,
    /// Blow-up resolution tree of the planar field.
    Resolve,
    /// Trajectory or return-map experiment.
    Trace,
    /// Reachable-set tree along the characteristic field.
    Reach,
    /// Rank of the end-point map at a control.
    Endpoint,
    /// Divergence/saddle check at the origin of the planar field.
    Divcheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Classify => "classify",
            Command::Resolve => "resolve",
            Command::Trace => "trace",
            Command::Reach => "reach",
            Command::Endpoint => "endpoint",
            Command::Divcheck => "divcheck",
        }
    }
}

#[derive(Clone, Debug, clap::Args, Serialize)]
pub struct Flags {
    /// Seed for all random sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Integrator tolerance, in [1e-12, 1e-3].
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub returns: Option<usize>,
    /// Output directory for report.json and CSV files.
    #[arg(long, default_value = ".")]
    #[serde(skip)]
    pub out: PathBuf,
}

impl Default for Flags {
    fn default() -> Self {
        Flags {
            seed: 0,
            tol: 1e-10,
            max_depth: None,
            returns: None,
            out: PathBuf::from("."),
        }
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PRECONDITION } else { EXIT_OK };
        }
    };
    match execute(args.command, &args.spec, &args.flags) {
        Ok(path) => {
            println!("{}", path.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("martinet {}: {e}", args.command.name());
            e.exit_code()
        }
    }
}

#[derive(Clone, Debug, Parser)]
#[command(name = "martinet", version, about = "Martinet surfaces and singular horizontal paths")]
struct Args {
    command: Command,
    spec: PathBuf,
    #[command(flatten)]
    flags: Flags,
}
