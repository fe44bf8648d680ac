use thiserror::Error;

/// Errors raised by the solvers and diagnostics in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown system preset `{0}` (expected MD or DKG)")]
    UnknownPreset(String),

    #[error("matrix {name} is not hermitian (deviation {deviation:e})")]
    NonHermitian { name: String, deviation: f64 },

    #[error("time {t} is not a nonnegative multiple of dt = {dt}")]
    OffLattice { t: f64, dt: f64 },

    #[error("backward cone of node {node} at t = {t} leaves the grid; pad the domain")]
    ConeLeavesGrid { node: usize, t: f64 },

    #[error("insufficient padding: field is nonzero outside the domain of determinacy at t = {t}")]
    InsufficientPadding { t: f64 },

    #[error("non-finite value at step {step}")]
    NumericalBlowup { step: usize },

    #[error("Picard iteration diverged at iteration {iteration} (distances {distances:?})")]
    Diverged {
        iteration: usize,
        distances: Vec<f64>,
    },

    #[error("point (t = {t}, x = {x}) lies outside the admissible region: {reason}")]
    OutOfRegion { t: f64, x: f64, reason: String },

    #[error("sweep entry eps = {eps} failed: {source}")]
    SweepEntry {
        eps: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
