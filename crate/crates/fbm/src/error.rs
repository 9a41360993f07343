use thiserror::Error;

#[derive(Debug, Error)]
pub enum FbmError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("increment covariance is not positive definite: Cholesky failed after jitter escalation up to {max_jitter:.3e}")]
    DecompositionFailed { max_jitter: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("empty index range: a={a} must be < b={b}")]
    EmptyRange { a: usize, b: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv parse error: {0}")]
    CsvParse(String),
}

pub(crate) fn check_hurst_open01(hurst: f64) -> Result<(), FbmError> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(FbmError::Domain(format!(
            "hurst must lie in (0,1), got {hurst}"
        )));
    }
    Ok(())
}

/// The Volterra-kernel and RKHS formulas only exist for H in (1/2, 1).
pub(crate) fn check_hurst_rough(hurst: f64) -> Result<(), FbmError> {
    if !(hurst > 0.5 && hurst < 1.0) {
        return Err(FbmError::Domain(format!(
            "hurst must lie in (1/2,1), got {hurst}"
        )));
    }
    Ok(())
}
