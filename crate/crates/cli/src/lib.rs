//! Command-line front end. Every subcommand reads a quiver document, calls
//! one library operation and prints a JSON run report.
//!
//! Exit codes: `0` success or affirmative answer, `1` a negative but valid
//! finding, `2` a semantic input error, `3` a parse error.

pub mod commands;
pub mod document;
pub mod output;

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use quiverkit::{QuiverError, ValidationReport};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_SEMANTIC: u8 = 2;
pub const EXIT_PARSE: u8 = 3;

/// Environment variable overriding the default solver tolerance.
pub const TOL_ENV: &str = "QUIVERKIT_TOL";

#[derive(Debug, Clone)]
pub struct CliError {
    pub exit: u8,
    pub message: String,
    pub line: Option<usize>,
    pub report: Option<ValidationReport>,
}

impl CliError {
    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Self {
            exit: EXIT_PARSE,
            message: message.into(),
            line: Some(line),
            report: None,
        }
    }

    pub fn semantic(message: impl Into<String>) -> Self {
        Self {
            exit: EXIT_SEMANTIC,
            message: message.into(),
            line: None,
            report: None,
        }
    }

    pub fn invalid(report: ValidationReport) -> Self {
        Self {
            exit: EXIT_SEMANTIC,
            message: report.to_string(),
            line: None,
            report: Some(report),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "parse error at line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl From<QuiverError> for CliError {
    fn from(e: QuiverError) -> Self {
        match e {
            QuiverError::Invalid(rep) => CliError::invalid(rep),
            other => CliError::semantic(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "quiverkit",
    version,
    about = "Quiver representations: gauge equations, stability and decompositions"
)]
pub struct Cli {
    /// Add wall-clock timing to the report (makes output non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Semi,
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BatchCommand {
    Validate,
    Solve,
    Stability,
    Decompose,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a document against every structural invariant.
    Validate { file: PathBuf },

    /// Build the symmetric quiver of a generalized block and write it out.
    BuildDw {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },

    /// Run the gauge-equation flow.
    Solve {
        file: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the residual trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },

    /// Search for a destabilizing subrepresentation.
    Stability {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "semi")]
        mode: ModeArg,
        /// Restrict to isotropic subrepresentations (needs a symmetric block).
        #[arg(long)]
        isotropic: bool,
        #[arg(long, default_value_t = 256)]
        budget: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        report: Option<PathBuf>,
    },

    /// Split a polystable representation into stable summands.
    Decompose {
        file: PathBuf,
        /// Tag summands by how the form restricts to them.
        #[arg(long)]
        orthogonal: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        report: Option<PathBuf>,
    },

    /// Limiting weight of a one-parameter subgroup.
    Weight {
        file: PathBuf,
        /// Inline weights such as "v1=0;v2=-1" (comma-separated per vertex) or a JSON file.
        #[arg(long)]
        chi: String,
        /// Use the structured weight (needs a symmetric block).
        #[arg(long)]
        orthogonal: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },

    /// Run one subcommand with default flags on every `*.json` in a directory.
    Batch {
        dir: PathBuf,
        #[arg(long, value_enum, default_value = "solve")]
        command: BatchCommand,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit: u8,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(cli: &Cli) -> Outcome {
    commands::dispatch(cli)
}

/// Parses `args` (including the program name) and runs.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let exit = if e.use_stderr() {
                EXIT_SEMANTIC
            } else {
                EXIT_OK
            };
            Outcome {
                exit,
                stdout: String::new(),
                stderr: e.to_string(),
            }
        }
    }
}
