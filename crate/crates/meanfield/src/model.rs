use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::MeanFieldError;

/// One time-marginal of an empirical measure: the atom list plus its
/// precomputed mean. The mean is cached eagerly so that mean-field models
/// evaluated once per particle per step stay O(1) per call.
#[derive(Debug, Clone)]
pub struct MarginalAtoms {
    atoms: Vec<Vec<f64>>,
    mean: Vec<f64>,
}

impl MarginalAtoms {
    pub fn new(atoms: Vec<Vec<f64>>) -> Result<Self, MeanFieldError> {
        if atoms.is_empty() {
            return Err(MeanFieldError::Shape("need at least one atom".into()));
        }
        let dim = atoms[0].len();
        if dim == 0 || atoms.iter().any(|a| a.len() != dim) {
            return Err(MeanFieldError::Shape(
                "atoms must share a positive dimension".into(),
            ));
        }
        let mut mean = vec![0.0; dim];
        for a in &atoms {
            for (m, v) in mean.iter_mut().zip(a) {
                *m += v;
            }
        }
        let inv = 1.0 / atoms.len() as f64;
        for m in &mut mean {
            *m *= inv;
        }
        Ok(Self { atoms, mean })
    }

    /// Point mass at `point`.
    pub fn dirac(point: &[f64]) -> Self {
        Self {
            atoms: vec![point.to_vec()],
            mean: point.to_vec(),
        }
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }
}

/// Drift evaluator: writes b(x, mu) into `out` (length d).
pub type DriftFn = dyn Fn(&[f64], &MarginalAtoms, &mut [f64]) + Send + Sync;
/// Diffusion evaluator: writes the d x d matrix sigma(x, mu) into `out`
/// row-major (length d^2).
pub type DiffusionFn = dyn Fn(&[f64], &MarginalAtoms, &mut [f64]) + Send + Sync;
/// State gradient of the drift at fixed measure, row-major d x d.
pub type DriftGradFn = dyn Fn(&[f64], &MarginalAtoms, &mut [f64]) + Send + Sync;

/// sup_x |tanh''(x)| = 4 / (3 sqrt(3)); curvature bound used by the built-in
/// bounded model families.
pub const TANH_CURVATURE_SUP: f64 = 0.769_800_358_919_501;

/// Coefficient bounds entering the noise-estimate constants and the step-size
/// diagnostics. `lions_*` entries are sups of the measure (Lions) derivative
/// of sigma and its state/measure gradients; built-in families compute them
/// analytically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    /// Joint Lipschitz constant of the drift in (state, measure).
    pub drift_lipschitz: f64,
    pub sigma_sup: f64,
    pub grad_sigma_sup: f64,
    pub hess_sigma_sup: f64,
    pub lions_sigma_sup: f64,
    /// Measure derivative of the state gradient of sigma.
    pub lions_grad_sigma_sup: f64,
    /// State gradient of the measure derivative of sigma.
    pub grad1_lions_sigma_sup: f64,
    /// Gradient of the measure derivative in its free argument.
    pub grad2_lions_sigma_sup: f64,
    /// Second-order measure derivative of sigma.
    pub lions2_sigma_sup: f64,
    /// |b(0, delta_0)|; controls the affine part of the drift growth.
    pub drift_at_origin_norm: f64,
}

impl ModelConstants {
    pub fn zeros() -> Self {
        Self {
            drift_lipschitz: 0.0,
            sigma_sup: 0.0,
            grad_sigma_sup: 0.0,
            hess_sigma_sup: 0.0,
            lions_sigma_sup: 0.0,
            lions_grad_sigma_sup: 0.0,
            grad1_lions_sigma_sup: 0.0,
            grad2_lions_sigma_sup: 0.0,
            lions2_sigma_sup: 0.0,
            drift_at_origin_norm: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), MeanFieldError> {
        let fields = [
            self.drift_lipschitz,
            self.sigma_sup,
            self.grad_sigma_sup,
            self.hess_sigma_sup,
            self.lions_sigma_sup,
            self.lions_grad_sigma_sup,
            self.grad1_lions_sigma_sup,
            self.grad2_lions_sigma_sup,
            self.lions2_sigma_sup,
            self.drift_at_origin_norm,
        ];
        if fields.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(MeanFieldError::Domain(
                "model constants must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// A distribution-dependent SDE model dX = b(X, mu) dt + sigma(X, mu) dB^H:
/// evaluators plus the coefficient bounds needed by the diagnostics.
#[derive(Clone)]
pub struct ModelSpec {
    dim: usize,
    drift: Arc<DriftFn>,
    diffusion: Arc<DiffusionFn>,
    drift_grad: Option<Arc<DriftGradFn>>,
    pub constants: ModelConstants,
    /// Lipschitz constant of x -> grad b(., mu)(x), when the gradient is
    /// supplied (needed by the moderate-deviation linearization).
    pub drift_grad_lipschitz: Option<f64>,
}

impl ModelSpec {
    pub fn new(
        dim: usize,
        drift: Arc<DriftFn>,
        diffusion: Arc<DiffusionFn>,
        constants: ModelConstants,
    ) -> Result<Self, MeanFieldError> {
        if dim == 0 {
            return Err(MeanFieldError::Domain("dim must be >= 1".into()));
        }
        constants.validate()?;
        Ok(Self {
            dim,
            drift,
            diffusion,
            drift_grad: None,
            constants,
            drift_grad_lipschitz: None,
        })
    }

    pub fn with_drift_grad(mut self, grad: Arc<DriftGradFn>, lipschitz: f64) -> Self {
        self.drift_grad = Some(grad);
        self.drift_grad_lipschitz = Some(lipschitz);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn drift(&self, x: &[f64], mu: &MarginalAtoms, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        (self.drift)(x, mu, out);
    }

    pub fn diffusion(&self, x: &[f64], mu: &MarginalAtoms, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim * self.dim);
        (self.diffusion)(x, mu, out);
    }

    pub fn has_drift_grad(&self) -> bool {
        self.drift_grad.is_some()
    }

    pub fn drift_grad(
        &self,
        x: &[f64],
        mu: &MarginalAtoms,
        out: &mut [f64],
    ) -> Result<(), MeanFieldError> {
        match &self.drift_grad {
            Some(g) => {
                g(x, mu, out);
                Ok(())
            }
            None => Err(MeanFieldError::Domain(
                "model does not provide a drift gradient".into(),
            )),
        }
    }

    /// Bounded mean-field family
    ///   b_i(x, mu)       = d0 + d1 tanh(x_i) + d2 tanh(mean_i(mu)),
    ///   sigma_ii(x, mu)  = s0 + s1 tanh(x_i) + s2 tanh(mean_i(mu))   (diagonal).
    /// Every regularity bound is analytic in the six coefficients.
    pub fn tanh_family(
        dim: usize,
        d0: f64,
        d1: f64,
        d2: f64,
        s0: f64,
        s1: f64,
        s2: f64,
    ) -> Result<Self, MeanFieldError> {
        for c in [d0, d1, d2, s0, s1, s2] {
            if !c.is_finite() {
                return Err(MeanFieldError::Domain("family coefficients must be finite".into()));
            }
        }
        let drift: Arc<DriftFn> = Arc::new(move |x, mu, out| {
            let m = mu.mean();
            for i in 0..x.len() {
                out[i] = d0 + d1 * x[i].tanh() + d2 * m[i].tanh();
            }
        });
        let d = dim;
        let diffusion: Arc<DiffusionFn> = Arc::new(move |x, mu, out| {
            let m = mu.mean();
            out.fill(0.0);
            for i in 0..d {
                out[i * d + i] = s0 + s1 * x[i].tanh() + s2 * m[i].tanh();
            }
        });
        let constants = ModelConstants {
            drift_lipschitz: d1.abs().max(d2.abs()),
            sigma_sup: s0.abs() + s1.abs() + s2.abs(),
            grad_sigma_sup: s1.abs(),
            hess_sigma_sup: s1.abs() * TANH_CURVATURE_SUP,
            lions_sigma_sup: s2.abs(),
            // grad sigma and the measure derivative each depend on one
            // argument only, so the mixed derivatives vanish.
            lions_grad_sigma_sup: 0.0,
            grad1_lions_sigma_sup: 0.0,
            grad2_lions_sigma_sup: 0.0,
            lions2_sigma_sup: s2.abs() * TANH_CURVATURE_SUP,
            drift_at_origin_norm: d0.abs() * (dim as f64).sqrt(),
        };
        let grad: Arc<DriftGradFn> = Arc::new(move |x, _mu, out| {
            out.fill(0.0);
            for i in 0..d {
                let c = x[i].cosh();
                out[i * d + i] = d1 / (c * c);
            }
        });
        Ok(Self::new(dim, drift, diffusion, constants)?
            .with_drift_grad(grad, d1.abs() * TANH_CURVATURE_SUP))
    }

    /// tanh family without the measure terms: b = d0 + d1 tanh(x_i),
    /// sigma = diag(s0 + s1 tanh(x_i)). The law-freeze map is constant for
    /// this family.
    pub fn measure_independent(
        dim: usize,
        d0: f64,
        d1: f64,
        s0: f64,
        s1: f64,
    ) -> Result<Self, MeanFieldError> {
        Self::tanh_family(dim, d0, d1, 0.0, s0, s1, 0.0)
    }

    /// Mean-reverting-to-the-law family b_i = a (mean_i(mu) - x_i) + c with
    /// constant diagonal diffusion s I. Unbounded drift, constant sigma: all
    /// sigma-derivative bounds vanish.
    pub fn linear_mean(dim: usize, a: f64, c: f64, s: f64) -> Result<Self, MeanFieldError> {
        for v in [a, c, s] {
            if !v.is_finite() {
                return Err(MeanFieldError::Domain("family coefficients must be finite".into()));
            }
        }
        let drift: Arc<DriftFn> = Arc::new(move |x, mu, out| {
            let m = mu.mean();
            for i in 0..x.len() {
                out[i] = a * (m[i] - x[i]) + c;
            }
        });
        let d = dim;
        let diffusion: Arc<DiffusionFn> = Arc::new(move |_x, _mu, out| {
            out.fill(0.0);
            for i in 0..d {
                out[i * d + i] = s;
            }
        });
        let constants = ModelConstants {
            drift_lipschitz: a.abs(),
            sigma_sup: s.abs(),
            grad_sigma_sup: 0.0,
            hess_sigma_sup: 0.0,
            lions_sigma_sup: 0.0,
            lions_grad_sigma_sup: 0.0,
            grad1_lions_sigma_sup: 0.0,
            grad2_lions_sigma_sup: 0.0,
            lions2_sigma_sup: 0.0,
            drift_at_origin_norm: c.abs() * (dim as f64).sqrt(),
        };
        let grad: Arc<DriftGradFn> = Arc::new(move |_x, _mu, out| {
            out.fill(0.0);
            for i in 0..d {
                out[i * d + i] = -a;
            }
        });
        Ok(Self::new(dim, drift, diffusion, constants)?.with_drift_grad(grad, 0.0))
    }
}
