use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::cov::fgn_autocov;
use crate::error::{check_hurst_open01, FbmError};
use crate::grid::TimeGrid;
use crate::path::SamplePath;
use crate::rng::StreamFactory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FbmMethod {
    /// Dense Cholesky factorization of the exact n x n increment covariance.
    Cholesky,
    /// Circulant embedding (FFT) of the fGn autocovariance; exact when the
    /// embedding is nonnegative definite, otherwise falls back to Cholesky.
    Circulant,
}

#[derive(Debug, Clone, Copy)]
pub struct FbmSamplerConfig {
    pub hurst: f64,
    pub method: FbmMethod,
    pub seed: u64,
    /// Initial diagonal jitter for the Cholesky fallback ladder.
    pub jitter: f64,
}

impl FbmSamplerConfig {
    pub fn new(hurst: f64, method: FbmMethod, seed: u64) -> Self {
        Self {
            hurst,
            method,
            seed,
            jitter: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FbmSample {
    pub paths: Vec<SamplePath>,
    /// Non-fatal sampler notes: eigenvalue clamps, Cholesky fallback, jitter.
    pub warnings: Vec<String>,
}

/// Sample `n_paths` independent d-dimensional fBM paths on `grid`, each
/// coordinate an independent scalar fBM started at 0.
///
/// Increments of path p, coordinate j are drawn from the dedicated RNG stream
/// `("fbm", p*dim + j)`, so the output is bit-identical for a fixed
/// `(config, grid, dim, n_paths)` regardless of thread count.
pub fn sample_fbm(
    grid: TimeGrid,
    dim: usize,
    n_paths: usize,
    config: &FbmSamplerConfig,
) -> Result<FbmSample, FbmError> {
    check_hurst_open01(config.hurst)?;
    if dim == 0 {
        return Err(FbmError::Domain("dim must be >= 1".into()));
    }
    if n_paths == 0 {
        return Err(FbmError::Domain("n_paths must be >= 1".into()));
    }
    if !(config.jitter >= 0.0) {
        return Err(FbmError::Domain("jitter must be >= 0".into()));
    }

    let n = grid.n_steps();
    let gamma: Vec<f64> = (0..=n)
        .map(|m| fgn_autocov(m, config.hurst, grid.dt()))
        .collect();

    let mut warnings = Vec::new();
    let gen = match config.method {
        FbmMethod::Cholesky => IncrGen::chol(&gamma, n, config.jitter, &mut warnings)?,
        FbmMethod::Circulant => match IncrGen::circulant(&gamma, n, &mut warnings) {
            Some(g) => g,
            None => IncrGen::chol(&gamma, n, config.jitter, &mut warnings)?,
        },
    };

    let factory = StreamFactory::new(config.seed);
    let paths: Result<Vec<SamplePath>, FbmError> = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let mut values = vec![0.0; (n + 1) * dim];
            for j in 0..dim {
                let mut rng = factory.stream("fbm", (p * dim + j) as u64);
                let incr = gen.increments(&mut rng, n);
                let mut acc = 0.0;
                for (k, dx) in incr.iter().enumerate() {
                    acc += dx;
                    values[(k + 1) * dim + j] = acc;
                }
            }
            SamplePath::new(grid, dim, values)
        })
        .collect();

    Ok(FbmSample {
        paths: paths?,
        warnings,
    })
}

enum IncrGen {
    Chol {
        l: DMatrix<f64>,
    },
    Circ {
        lam_sqrt: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
}

impl IncrGen {
    fn chol(
        gamma: &[f64],
        n: usize,
        jitter0: f64,
        warnings: &mut Vec<String>,
    ) -> Result<Self, FbmError> {
        let mat = DMatrix::from_fn(n, n, |i, j| gamma[i.abs_diff(j)]);
        if let Some(c) = Cholesky::new(mat.clone()) {
            return Ok(IncrGen::Chol { l: c.unpack() });
        }
        // escalate jitter by decades up to 1e-8 of the (constant) diagonal
        let cap = 1e-8 * gamma[0];
        let mut jitter = if jitter0 > 0.0 { jitter0 } else { 1e-12 };
        while jitter <= cap {
            let mut m2 = mat.clone();
            for i in 0..n {
                m2[(i, i)] += jitter;
            }
            if let Some(c) = Cholesky::new(m2) {
                warnings.push(format!(
                    "cholesky required diagonal jitter {jitter:.3e} (cap {cap:.3e})"
                ));
                return Ok(IncrGen::Chol { l: c.unpack() });
            }
            jitter *= 10.0;
        }
        Err(FbmError::DecompositionFailed { max_jitter: cap })
    }

    /// Wood-Chan embedding of the fGn autocovariance into a circulant of size
    /// 2n. Returns None (caller falls back to Cholesky) when an eigenvalue is
    /// more negative than -1e-10 * max; eigenvalues inside that band are
    /// clamped to zero.
    fn circulant(gamma: &[f64], n: usize, warnings: &mut Vec<String>) -> Option<Self> {
        let m_len = 2 * n;
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(m_len);

        let mut buf = vec![Complex::new(0.0, 0.0); m_len];
        for k in 0..=n {
            buf[k].re = gamma[k];
            if k > 0 && k < n {
                buf[m_len - k].re = gamma[k];
            }
        }
        fft.process(&mut buf);

        let lambda: Vec<f64> = buf.iter().map(|c| c.re).collect();
        let max = lambda.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let tol = 1e-10 * max;
        let worst = lambda.iter().cloned().fold(f64::INFINITY, f64::min);
        if worst < -tol {
            warnings.push(format!(
                "circulant embedding not nonnegative definite (min eigenvalue {worst:.3e} < -{tol:.3e}); falling back to cholesky"
            ));
            return None;
        }
        let mut clamped = 0usize;
        let lam_sqrt: Vec<f64> = lambda
            .iter()
            .map(|&l| {
                if l < 0.0 {
                    clamped += 1;
                    0.0
                } else {
                    l.sqrt()
                }
            })
            .collect();
        if clamped > 0 {
            warnings.push(format!(
                "circulant embedding: {clamped} eigenvalue(s) in (-{tol:.3e}, 0) clamped to 0"
            ));
        }
        Some(IncrGen::Circ { lam_sqrt, fft })
    }

    /// Draw one length-n increment vector. Consumes a fixed number of normals
    /// (n for Cholesky, 2n for circulant) in a fixed order.
    fn increments(&self, rng: &mut ChaCha12Rng, n: usize) -> Vec<f64> {
        match self {
            IncrGen::Chol { l } => {
                let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                (l * z).iter().cloned().collect()
            }
            IncrGen::Circ { lam_sqrt, fft } => {
                let m_len = lam_sqrt.len();
                let half = m_len / 2; // = n
                let mut z = vec![Complex::new(0.0, 0.0); m_len];
                z[0].re = lam_sqrt[0] * rng.sample::<f64, _>(StandardNormal);
                z[half].re = lam_sqrt[half] * rng.sample::<f64, _>(StandardNormal);
                for k in 1..half {
                    let a: f64 = rng.sample(StandardNormal);
                    let b: f64 = rng.sample(StandardNormal);
                    let c = Complex::new(a, b) * (lam_sqrt[k] / std::f64::consts::SQRT_2);
                    z[k] = c;
                    z[m_len - k] = c.conj();
                }
                fft.process(&mut z);
                let scale = 1.0 / (m_len as f64).sqrt();
                z[..n].iter().map(|c| c.re * scale).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_at_zero_and_deterministic() {
        let grid = TimeGrid::new(1.0, 16).unwrap();
        for method in [FbmMethod::Cholesky, FbmMethod::Circulant] {
            let cfg = FbmSamplerConfig::new(0.75, method, 7);
            let a = sample_fbm(grid, 2, 3, &cfg).unwrap();
            let b = sample_fbm(grid, 2, 3, &cfg).unwrap();
            for (pa, pb) in a.paths.iter().zip(&b.paths) {
                assert_eq!(pa.values(), pb.values());
                assert_eq!(pa.node_values(0), &[0.0, 0.0]);
            }
        }
    }

    #[test]
    fn single_step_grid_works() {
        let grid = TimeGrid::new(2.0, 1).unwrap();
        for method in [FbmMethod::Cholesky, FbmMethod::Circulant] {
            let cfg = FbmSamplerConfig::new(0.6, method, 1);
            let s = sample_fbm(grid, 1, 4, &cfg).unwrap();
            assert_eq!(s.paths.len(), 4);
        }
    }
}
