use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid composition: {0}")]
    InvalidComposition(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("value {value} outside domain {domain}")]
    OutOfDomain { value: f64, domain: String },
    #[error("slice A = {0} of the simplex is empty")]
    EmptySlice(f64),
    #[error("quadrature did not reach tolerance {tol:e} (estimated error {estimate:e})")]
    QuadratureDiverged { tol: f64, estimate: f64 },
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("no Euler-Maclaurin plan with s <= {max_s} and m <= {max_m} meets epsilon = {epsilon:e}")]
    NoFeasiblePlan { max_s: usize, max_m: usize, epsilon: f64 },
    #[error("density {value:e} exceeds envelope {envelope:e} on face {face}")]
    EnvelopeViolation { face: String, value: f64, envelope: f64 },
    #[error("acceptance rate {rate:e} below guard on face {face}")]
    AcceptanceCollapse { face: String, rate: f64 },
    #[error("missing bandwidth for face {0}")]
    MissingBandwidth(String),
    #[error("curves have different bin edges")]
    MismatchedEdges,
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
