//! Error types shared across the simulation crate.

use thiserror::Error;

/// Errors produced by state construction, model building, integration, and
/// the statistics layer.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("level index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid mixture weights: {reason}")]
    InvalidWeights { reason: String },

    #[error("matrix is not Hermitian: max entrywise deviation {deviation:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("state invariant violated at t = {t} ns: {what}")]
    InvariantViolation { t: f64, what: String },

    #[error("invalid parameter {name}: {constraint} (got {value})")]
    InvalidParameter {
        name: &'static str,
        constraint: &'static str,
        value: f64,
    },

    #[error("duplicate drive on level pair ({a}, {b})")]
    DuplicateDrive { a: &'static str, b: &'static str },

    #[error("step size underflow at t = {t} ns (h = {h:.3e} ns); generator too stiff for the explicit integrator")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("step budget exhausted after {steps} steps at t = {t} ns")]
    StepBudgetExhausted { steps: usize, t: f64 },

    #[error("invalid sample times: {reason}")]
    InvalidSampleTimes { reason: String },

    #[error("no population maximum found within {window} ns; drive is overdamped")]
    NoMaximumFound { window: f64 },

    #[error("bisection bracket failure: max fidelity {f_lo:.4} at eta = {eta_lo:.3e} and {f_hi:.4} at eta = {eta_hi:.3e} do not straddle the single-shot threshold")]
    BracketFailure {
        eta_lo: f64,
        f_lo: f64,
        eta_hi: f64,
        f_hi: f64,
    },

    #[error("grid point (t_readout = {t} ns, eta = {eta}) failed: {source}")]
    GridPointFailed {
        t: f64,
        eta: f64,
        #[source]
        source: Box<CoreError>,
    },
}

pub type Result<T> = std::result::Result<T, CoreError>;
