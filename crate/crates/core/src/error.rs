use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("ball of radius {radius} at the given boundary point cuts the domain into {components} pieces")]
    DisconnectedRegion { radius: f64, components: usize },

    #[error("ball of radius {radius} leaves no Dirichlet arc inside the domain")]
    BallCoversDomain { radius: f64 },

    #[error("mesh generation failed: {0}")]
    MeshFailure(String),

    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NonConvergence { sweeps: usize, off_norm: f64 },

    #[error("no boundary edge carries the requested mark: {0}")]
    EmptyBoundary(&'static str),

    #[error("Rayleigh quotient denominator vanishes ({0:e})")]
    ZeroDenominator(f64),

    #[error("zero set is empty")]
    NoZeros,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable machine-readable tag used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DisconnectedRegion { .. } => "DisconnectedRegion",
            Error::BallCoversDomain { .. } => "BallCoversDomain",
            Error::MeshFailure(_) => "MeshFailure",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::EmptyBoundary(_) => "EmptyBoundary",
            Error::ZeroDenominator(_) => "ZeroDenominator",
            Error::NoZeros => "NoZeros",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
