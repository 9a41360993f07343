//! Fractional Brownian motion on uniform time grids.
//!
//! Provides the exact covariance and the Volterra kernel of fBM with Hurst
//! index `H`, two exact-in-law samplers (dense Cholesky of the increment
//! covariance and circulant embedding of the fGn autocovariance), grid
//! Hölder seminorms, a deterministic labelled RNG stream factory, and the
//! CSV path schema shared by the rest of the workspace.

pub mod cov;
pub mod csvio;
pub mod error;
pub mod grid;
pub mod holder;
pub mod kernel;
pub mod path;
pub mod quad;
pub mod rng;
pub mod sampler;

pub use cov::{fbm_covariance, fgn_autocov};
pub use error::FbmError;
pub use grid::TimeGrid;
pub use holder::{holder_seminorm, holder_subdivision_check};
pub use kernel::{volterra_c, volterra_kernel};
pub use path::SamplePath;
pub use quad::GaussLegendre;
pub use rng::StreamFactory;
pub use sampler::{sample_fbm, FbmMethod, FbmSample, FbmSamplerConfig};
