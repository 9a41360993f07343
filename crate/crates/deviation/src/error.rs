use thiserror::Error;

#[derive(Debug, Error)]
pub enum DeviationError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("skeleton solution blew up at fine step {step}: norm {norm:.3e}")]
    BlowUp { step: usize, norm: f64 },

    #[error("degenerate estimate: {0}")]
    Degenerate(String),

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error(transparent)]
    Frac(#[from] fraccalc::FracError),

    #[error(transparent)]
    MeanField(#[from] meanfield::MeanFieldError),

    #[error(transparent)]
    Fbm(#[from] fbm::FbmError),
}
