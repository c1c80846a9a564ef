//! The `anamorph` command line.
//!
//! Exit codes: 0 success, 2 invalid input or geometry, 3 file I/O, 4 detector failure.
//! Machine-readable summaries go to stdout as JSON lines; logs go to stderr.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use anamorph_core::optimizer::{ObjectiveError, OptimizerError};
use anamorph_core::oracle::OracleError;

use crate::imageio::ImageIoError;
use crate::manifest::RunManifest;

mod evaluate;
mod generate;
mod optimize;
mod simulate;

pub use evaluate::EvaluateArgs;
pub use generate::GenerateArgs;
pub use optimize::{OptimizeArgs, OptimizeConfig};
pub use simulate::{parse_sweep, SimulateArgs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_ORACLE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "anamorph", version, about = "Anamorphic road-decal attacks and their V2X network impact")]
#[command(after_help = "Exit codes: 0 ok, 2 invalid input or geometry, 3 I/O error, 4 detector failure.\n\
    Settings resolve as: command-line flag > PHANTOM_SEED (seeds only) > config file > built-in default.")]
pub struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Warp a source image into a printable road decal for one viewpoint.
    Generate(GenerateArgs),
    /// Search decal parameters that maximize a detector's phantom-object confidence.
    Optimize(OptimizeArgs),
    /// Run a V2X network scenario, optionally sweeping one parameter.
    Simulate(SimulateArgs),
    /// Attack success rate per distance bin and AUC from trial records.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Oracle(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Invalid(_) => EXIT_INVALID,
            Self::Io(_) => EXIT_IO,
            Self::Oracle(_) => EXIT_ORACLE,
        }
    }

    pub(crate) fn invalid(msg: impl ToString) -> Self {
        Self::Invalid(msg.to_string())
    }
}

impl From<ImageIoError> for CliError {
    fn from(e: ImageIoError) -> Self {
        match e {
            ImageIoError::Io { .. } => Self::Io(e.to_string()),
            ImageIoError::Format { .. } => Self::Invalid(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        Self::Oracle(e.to_string())
    }
}

impl From<OptimizerError> for CliError {
    fn from(e: OptimizerError) -> Self {
        match &e {
            OptimizerError::Evaluation { source: ObjectiveError::Oracle(_), .. } => Self::Oracle(e.to_string()),
            _ => Self::Invalid(e.to_string()),
        }
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

pub(crate) fn write_bytes(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub(crate) fn write_json_pretty<T: serde::Serialize>(path: &Path, v: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(v).map_err(CliError::invalid)?;
    text.push('\n');
    write_bytes(path, text)
}

pub(crate) fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub(crate) fn write_manifest(m: &RunManifest, path: &Path) -> Result<(), CliError> {
    m.write(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// One JSON line on stdout.
pub(crate) fn emit(v: &serde_json::Value) {
    println!("{v}");
}

pub(crate) fn resolve_seed(flag: Option<u64>, config: u64) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    Ok(crate::manifest::seed_from_env().map_err(CliError::Invalid)?.unwrap_or(config))
}

pub(crate) fn parse_range(s: &str) -> Result<(i32, i32), CliError> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| CliError::Invalid(format!("range {s:?} must be lo:hi")))?;
    let num = |v: &str| v.trim().parse::<i32>().map_err(|_| CliError::Invalid(format!("bad range bound {v:?}")));
    let (lo, hi) = (num(lo)?, num(hi)?);
    if hi < lo {
        return Err(CliError::Invalid(format!("range {lo}:{hi} is empty")));
    }
    Ok((lo, hi))
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().target(env_logger::Target::Stderr).try_init();
}

/// Parses `args` (including the program name) and runs the command, returning the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    init_logging(cli.verbose);
    let result = match cli.command {
        Command::Generate(a) => generate::run(a),
        Command::Optimize(a) => optimize::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Evaluate(a) => evaluate::run(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}

pub(crate) fn path_string(p: &Path) -> String {
    p.display().to_string()
}

pub(crate) fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}
