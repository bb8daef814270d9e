use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("nontrivial branch lost at b = {b}: the minimizer is the zero profile")]
    DegenerateMinimizer { b: f64 },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("point ({x}, {y}) lies outside the domain")]
    OutsideDomain { x: f64, y: f64 },
    #[error("mesh generation failed: {0}")]
    MeshFailure(String),
    #[error("{masked} of {total} nodes fall below the division floor")]
    UnderflowRegionTooLarge { masked: usize, total: usize },
    #[error("insufficient range for decay fit: {0}")]
    InsufficientRange(String),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "InvalidParams",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::DegenerateMinimizer { .. } => "DegenerateMinimizer",
            Error::InvalidGeometry(_) => "InvalidGeometry",
            Error::OutsideDomain { .. } => "OutsideDomain",
            Error::MeshFailure(_) => "MeshFailure",
            Error::UnderflowRegionTooLarge { .. } => "UnderflowRegionTooLarge",
            Error::InsufficientRange(_) => "InsufficientRange",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
