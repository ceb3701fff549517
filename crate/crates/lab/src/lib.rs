//! Experiment harness for the Hele-Shaw free-boundary laboratory.
//!
//! The library side of the `hslab` binary: config parsing, sandboxed
//! output directories, CSV/JSON/binary dataset emission, reproducibility
//! manifests, and the experiment implementations themselves.  Everything
//! here is deterministic by construction: seeded generators, fixed
//! iteration orders, and text formatting with stable round-trip output,
//! so identical configs produce byte-identical datasets.

pub mod config;
pub mod experiments;
pub mod io;
pub mod manifest;
pub mod outdir;

use std::fmt;

/// Failure classes with their process exit codes: configuration problems
/// exit 2, numerical failures (solver breakdowns, degenerate geometry)
/// exit 3, assertion failures (checks that ran and failed) exit 4.
#[derive(Debug)]
pub enum LabError {
    /// Config file missing, unreadable, or schema-invalid.
    Config(Vec<config::Violation>),
    /// A numerical stage failed: solver stall, degenerate geometry,
    /// out-of-range parameters discovered at run time.
    Numeric(String),
    /// A configured assertion failed.
    Assertion(String),
    /// Filesystem trouble outside the failure taxonomy.
    Io(String),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            LabError::Numeric(_) => 3,
            LabError::Assertion(_) => 4,
            LabError::Io(_) => 1,
        }
    }
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabError::Config(violations) => {
                writeln!(f, "invalid configuration ({} problem(s)):", violations.len())?;
                for v in violations {
                    writeln!(f, "  {v}")?;
                }
                Ok(())
            }
            LabError::Numeric(msg) => write!(f, "numerical failure: {msg}"),
            LabError::Assertion(msg) => write!(f, "assertion failure: {msg}"),
            LabError::Io(msg) => write!(f, "io failure: {msg}"),
        }
    }
}

impl std::error::Error for LabError {}

impl From<heleshaw_core::error::CoreError> for LabError {
    fn from(e: heleshaw_core::error::CoreError) -> Self {
        LabError::Numeric(e.to_string())
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
