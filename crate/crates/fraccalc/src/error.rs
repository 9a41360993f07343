use thiserror::Error;

#[derive(Debug, Error)]
pub enum FracError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("regularity violation: {0}")]
    Regularity(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error(transparent)]
    Fbm(#[from] fbm::FbmError),
    #[error("csv parse error: {0}")]
    CsvParse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_alpha(alpha: f64) -> Result<(), FracError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(FracError::Domain(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    Ok(())
}
