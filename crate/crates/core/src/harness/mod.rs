//! CLI orchestration: problem files, reference optima, runs, suites and audits.

pub mod audit;
pub mod config;
mod commands;
mod suite;

use std::path::{Path, PathBuf};

pub use audit::{audit_problems, cmd_check, run_battery, AuditOptions, AuditReport, InvariantResult};
pub use commands::{
    cmd_describe, cmd_generate, cmd_reference, cmd_run, describe_problem, reference_problem, write_reference,
    ReferenceRecord, RunOutput, REFERENCE_MARGIN, REFERENCE_TOL,
};
pub use config::{OutputFormat, SuiteConfig};
pub use suite::{cmd_suite, evals_to_threshold, SuiteReport, SuiteRow, GAP_THRESHOLDS, SUMMARY_HEADER};

use crate::error::ProblemError;
use crate::solvers::SolveError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    BadFile { path: PathBuf, message: String },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("{0}")]
    Invariant(String),
}

impl HarnessError {
    pub fn usage(msg: impl Into<String>) -> Self {
        HarnessError::Usage(msg.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn from_problem(path: &Path, e: ProblemError) -> Self {
        match e {
            ProblemError::Io(source) => HarnessError::io(path, source),
            ProblemError::UnknownFamily(_) | ProblemError::InvalidParameter { .. } => HarnessError::Usage(e.to_string()),
            other => HarnessError::BadFile { path: path.to_path_buf(), message: other.to_string() },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) | HarnessError::Solve(_) => EXIT_USAGE,
            HarnessError::Io { .. } | HarnessError::BadFile { .. } => EXIT_IO,
            HarnessError::Invariant(_) => EXIT_INVARIANT,
        }
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}
