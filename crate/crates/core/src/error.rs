use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CdtError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{what} did not converge (achieved {achieved:e})")]
    Convergence { what: &'static str, achieved: f64 },
    #[error("matrix is not {expected} (deviation {deviation:e})")]
    WrongRole {
        expected: &'static str,
        deviation: f64,
    },
    #[error("J0 root index {0} outside supported range 1..=30")]
    RootIndexOutOfRange(usize),
    #[error("trajectory ends at t = {available} but t = {requested} was requested")]
    InsufficientCoverage { requested: f64, available: f64 },
    #[error("grid point {index} (g1/omega = {g1_over_omega}): {source}")]
    AtGridPoint {
        index: usize,
        g1_over_omega: f64,
        #[source]
        source: Box<CdtError>,
    },
}

impl CdtError {
    /// True if this error (or the one it wraps) is a numerical convergence failure.
    pub fn is_convergence(&self) -> bool {
        match self {
            CdtError::Convergence { .. } => true,
            CdtError::AtGridPoint { source, .. } => source.is_convergence(),
            _ => false,
        }
    }

    pub(crate) fn at_grid_point(self, index: usize, g1_over_omega: f64) -> Self {
        CdtError::AtGridPoint {
            index,
            g1_over_omega,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, CdtError>;
