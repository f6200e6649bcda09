use thiserror::Error;

/// Errors raised by the simulation engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Inconsistent inputs: parameter domain, basis/kind mismatch, wrong sector.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    /// An expression was evaluated on one of its poles.
    #[error("pole: {0}")]
    Pole(String),

    /// A resummed denominator of the effective model vanished.
    #[error("singular effective model: {0}")]
    Singularity(String),

    #[error("no sign change of the resonance function on [{lo}, {hi}]")]
    NoRootInInterval { lo: f64, hi: f64 },

    #[error("state {0} is not a member of the basis")]
    UnknownState(String),

    #[error("norm drift {drift:.3e} at g1*t = {time} exceeds the abort threshold")]
    NormDrift { time: f64, drift: f64 },

    #[error(
        "density-matrix invariant breach at g1*t = {time}: trace defect {trace_defect:.3e}, \
         hermiticity defect {hermiticity_defect:.3e}, min eigenvalue {min_eigenvalue:.3e}"
    )]
    DensityInvariant { time: f64, trace_defect: f64, hermiticity_defect: f64, min_eigenvalue: f64 },

    #[error("eigensolver failed to converge on a {dim}x{dim} matrix (max |entry| = {scale:.3e})")]
    Eigensolver { dim: usize, scale: f64 },
}

impl Error {
    /// True for failures of a numerical invariant during integration.
    pub fn is_numerical_breach(&self) -> bool {
        matches!(self, Error::NormDrift { .. } | Error::DensityInvariant { .. } | Error::Eigensolver { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
