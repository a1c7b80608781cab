use thiserror::Error;

/// Errors raised by the estimation and numerics layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot:.3e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
        /// Best iterate found before giving up.
        best: Vec<f64>,
    },

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("error density is zero at {at:.6} (quantile level {tau})")]
    ZeroDensity { tau: f64, at: f64 },

    #[error("no observations inside the kernel window at x = {x:.6}, h = {h:.6}")]
    EmptyWindow { x: f64, h: f64 },

    #[error("every bandwidth on the grid produced empty windows")]
    AllWindowsEmpty,

    #[error("invalid block scheme: {0}")]
    InvalidScheme(String),

    #[error("block variance S({theta:.6}) is degenerate")]
    DegenerateVariance { theta: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("all {0} replications failed")]
    AllReplicationsFailed(usize),
}

impl Error {
    /// Variant name, used to tally failures.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DegenerateDesign(_) => "DegenerateDesign",
            Error::RankDeficient => "RankDeficient",
            Error::ZeroDensity { .. } => "ZeroDensity",
            Error::EmptyWindow { .. } => "EmptyWindow",
            Error::AllWindowsEmpty => "AllWindowsEmpty",
            Error::InvalidScheme(_) => "InvalidScheme",
            Error::DegenerateVariance { .. } => "DegenerateVariance",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::InvalidInput(_) => "InvalidInput",
            Error::AllReplicationsFailed(_) => "AllReplicationsFailed",
        }
    }

    /// The best iterate carried by a non-convergence error, if any.
    pub fn best_iterate(&self) -> Option<&[f64]> {
        match self {
            Error::NoConvergence { best, .. } => Some(best),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
