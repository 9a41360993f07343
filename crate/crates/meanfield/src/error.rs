use fbm::FbmError;
use pathmetric::MetricError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeanFieldError {
    /// The fixed-point exponent selection only works for Hurst parameters
    /// above the golden-ratio threshold (sqrt(5)-1)/2.
    #[error("unsupported hurst {0}: need hurst in ((sqrt(5)-1)/2, 1)")]
    UnsupportedHurst(f64),

    #[error("exponent selection failed: {0}")]
    Exponents(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Euler state left the admissible ball; the drift/diffusion pair is
    /// blowing up on this grid.
    #[error("state norm {norm:.3e} exceeded the blow-up guard at step {step}")]
    BlowUp { step: usize, norm: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error(transparent)]
    Fbm(#[from] FbmError),

    #[error(transparent)]
    Metric(#[from] MetricError),
}
