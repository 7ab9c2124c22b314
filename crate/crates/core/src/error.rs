use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("product or series did not converge within {terms} terms (tail bound {tail_bound:e})")]
    NonConvergence { terms: usize, tail_bound: f64 },
    #[error("pole: {0}")]
    Pole(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("point {value} is not on the lattice")]
    OffLattice { value: f64 },
    #[error("sampling produced a non-finite value at index {index}")]
    Sample { index: usize },
    #[error("grid depth {depth} is insufficient: {reason}")]
    Depth { depth: usize, reason: String },
    #[error("series diverges: ratio {ratio} >= 1")]
    Divergence { ratio: f64 },
    #[error("no contraction: single lattice step from {lo} to {hi} has omega {omega} >= 1")]
    NoContraction { lo: f64, hi: f64, omega: f64 },
    #[error("Picard iteration did not reach tolerance in {iterations} iterations (last step {last_step:e})")]
    MaxIter { iterations: usize, last_step: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
