use thiserror::Error;

/// Errors raised by the solvers and the model constructors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("coupling a = {0} is negative; the corrected norm is not positive")]
    NegativeCoupling(f64),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid wave function: {0}")]
    InvalidWaveFunction(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("cannot normalize a field with zero norm")]
    ZeroNorm,

    #[error("operation requires the {expected} variant, got {got}")]
    WrongVariant {
        expected: &'static str,
        got: &'static str,
    },

    #[error("effective mass is singular at E = {energy} (1 - 2amE = {gap:e})")]
    SingularMass { energy: f64, gap: f64 },

    #[error("quantity is unbounded for a = 0")]
    Unbounded,

    #[error("boundary condition {0} is not supported here")]
    UnsupportedBoundary(&'static str),

    #[error(
        "eigenpair {index} did not converge after {iterations} iterations (residual {residual:e}, tolerance {tolerance:e})"
    )]
    ConvergenceFailure {
        index: usize,
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("requested {requested} eigenpairs but only {available} are available")]
    TooManyStates { requested: usize, available: usize },

    #[error("state index {index} out of range (have {count})")]
    IndexRange { index: usize, count: usize },

    #[error("tridiagonal solve failed: zero pivot at row {0}")]
    SolveFailure(usize),

    #[error("need at least {needed} frames, got {got}")]
    TooFewFrames { needed: usize, got: usize },

    #[error("energy E = {energy} sits on a band edge of a segment with V = {potential}")]
    BandEdge { energy: f64, potential: f64 },

    #[error("no propagating incident channel at E = {energy} (incident V = {potential})")]
    NoIncidentChannel { energy: f64, potential: f64 },

    #[error("energy leaves the pass band on {} interval(s), first [{}, {}]",
        .0.len(), .0.first().map_or(f64::NAN, |iv| iv.0), .0.first().map_or(f64::NAN, |iv| iv.1))]
    OutOfBand(Vec<(f64, f64)>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
