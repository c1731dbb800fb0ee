//! Error type shared across the crate.

use thiserror::Error;

/// Convenience alias used by every fallible operation in this crate.
pub type Result<T> = std::result::Result<T, CoreError>;

/// Unified error for parameter validation, numerical-domain violations, and
/// search failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    /// A configuration or constructor argument failed validation.
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter {
        field: &'static str,
        reason: String,
    },

    /// An argument left the mathematical domain of an operation.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// A polynomial or series accumulation left finite f64 range.
    #[error("overflow in {op} at order {order}")]
    Overflow { op: &'static str, order: u32 },

    /// The Lambert W series failed to converge within its term budget.
    #[error(
        "lambert series did not converge after {terms} terms \
         (last term magnitude {last_term:.3e})"
    )]
    SeriesDiverged { terms: u32, last_term: f64 },

    /// The defining equation has no root on the principal bracket.
    #[error(
        "no root on the requested branch: mu = {mu:.6e} lies below the \
         bracket minimum {minimum:.6e}"
    )]
    InfeasibleBranch { mu: f64, minimum: f64 },

    /// No phase root exists inside a search interval.
    #[error("no phase root in [{lo:.6} m, {hi:.6} m]")]
    NoPhaseRoot { lo: f64, hi: f64 },

    /// Phase alignment failed for one antenna even after widening the search.
    #[error(
        "phase alignment failed for antenna {antenna_index}: \
         no root in [{lo:.6} m, {hi:.6} m]"
    )]
    AlignmentFailure {
        antenna_index: usize,
        lo: f64,
        hi: f64,
    },

    /// Two containers that must agree in length do not.
    #[error("shape mismatch in {op}: expected {expected} elements, got {actual}")]
    ShapeMismatch {
        op: &'static str,
        expected: usize,
        actual: usize,
    },

    /// Every Monte-Carlo trial at one sweep point failed.
    #[error("all {trials} trials failed at sweep value {swept_value}")]
    AllTrialsFailed { swept_value: f64, trials: u64 },
}
