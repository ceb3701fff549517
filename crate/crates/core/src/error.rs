//! Error types shared across the numerical core.

use alloc::string::String;
use core::fmt;

/// Errors produced by core routines.
///
/// Every variant carries enough context to act on without a backtrace:
/// validation failures name the offending quantity, lattice mismatches say
/// how to fix the step, and solver stalls report where they stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// A parameter or grid failed validation.
    Invalid {
        /// Name of the offending parameter or structure.
        what: &'static str,
        /// Human-readable description of the violation.
        detail: String,
    },
    /// A requested step is not a multiple of the sample lattice.
    NotLatticeMultiple {
        /// The requested step.
        requested: f64,
        /// The lattice spacing it must divide into.
        lattice: f64,
    },
    /// An iterative solver did not reach tolerance within its iteration cap.
    SolverStall {
        /// Iterations performed before giving up.
        iterations: usize,
        /// Relative residual at the stall.
        relative_residual: f64,
    },
    /// The evolving interface violated a structural invariant.
    Degenerate {
        /// Name of the violated invariant.
        what: &'static str,
        /// Human-readable description with the observed values.
        detail: String,
    },
    /// Requested samples fall outside the computational domain.
    OutOfDomain {
        /// Description of what fell outside.
        what: &'static str,
    },
    /// The sample resolution cannot realize the requested analysis.
    Unresolved {
        /// Name of the analysis that could not be realized.
        what: &'static str,
        /// Description of the missing resolution.
        detail: String,
    },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::Invalid { what, detail } => write!(f, "invalid {what}: {detail}"),
            CoreError::NotLatticeMultiple { requested, lattice } => write!(
                f,
                "step {requested} is not a lattice multiple of {lattice}; \
                 choose h = m * {lattice} for an integer m >= 1"
            ),
            CoreError::SolverStall {
                iterations,
                relative_residual,
            } => write!(
                f,
                "solver stalled after {iterations} iterations at relative residual \
                 {relative_residual:e}"
            ),
            CoreError::Degenerate { what, detail } => {
                write!(f, "degenerate state ({what}): {detail}")
            }
            CoreError::OutOfDomain { what } => write!(f, "out of domain: {what}"),
            CoreError::Unresolved { what, detail } => {
                write!(f, "insufficient resolution for {what}: {detail}")
            }
        }
    }
}

impl core::error::Error for CoreError {}

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, CoreError>;
