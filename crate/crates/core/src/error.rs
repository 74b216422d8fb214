use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GneError {
    #[error("player index {index} out of range for {num_players} players")]
    IndexOutOfRange { index: usize, num_players: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("profile is infeasible (violation {violation:.3e})")]
    Infeasible { violation: f64 },

    #[error("halfspace projection could not bracket the multiplier; the set is empty or degenerate")]
    BracketFailure,

    #[error("inner maximization did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("iterate diverged at iteration {iteration} (norm {norm:.3e})")]
    Divergence { iteration: usize, norm: f64 },
}

pub type Result<T> = std::result::Result<T, GneError>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(GneError::DimensionMismatch { expected, actual })
    }
}

pub(crate) fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(GneError::NonFinite(what))
    }
}
