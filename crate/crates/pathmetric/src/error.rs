use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// The transport LPs are feasible by construction, so a solver failure
    /// indicates an internal bug or numerically degenerate face.
    #[error("linear program failed: {0}")]
    Lp(String),

    #[error(transparent)]
    Fbm(#[from] fbm::FbmError),
}
