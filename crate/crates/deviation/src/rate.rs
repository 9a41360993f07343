use argmin::core::{CostFunction, Error as ArgminError, Executor, Gradient, State};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::LBFGS;
use fbm::{fbm_covariance, TimeGrid};
use fraccalc::SteppedFunction;
use meanfield::ModelSpec;
use serde::{Deserialize, Serialize};

use crate::control::Control;
use crate::error::DeviationError;
use crate::skeleton::{skeleton_ldp_raw, REFINE};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateOptions {
    /// Number of cells of the step-function control; defaults to the number
    /// of grid steps. Must divide the internal fine cell count.
    pub n_cells: Option<usize>,
    /// Initial quadratic penalty on the endpoint gap.
    pub penalty0: f64,
    /// Multiplier applied to the penalty after every continuation stage.
    pub penalty_factor: f64,
    /// Number of continuation stages.
    pub stages: usize,
    /// Gradient tolerance of the inner quasi-Newton loop.
    pub inner_tol: f64,
    /// Iteration cap of the inner loop, per stage.
    pub max_inner_iters: u64,
    /// Endpoint gap below which the run counts as converged.
    pub residual_tol: f64,
}

impl Default for RateOptions {
    fn default() -> Self {
        Self {
            n_cells: None,
            penalty0: 10.0,
            penalty_factor: 10.0,
            stages: 6,
            inner_tol: 1e-8,
            max_inner_iters: 200,
            residual_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerDiagnostics {
    /// Endpoint gap ended below `residual_tol`.
    pub converged: bool,
    pub stages_run: usize,
    pub inner_iterations: u64,
    pub final_penalty: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RateResult {
    /// Energy of the minimizing control, `|h*|^2 / 2`.
    pub value: f64,
    pub control: Control,
    /// Euclidean endpoint gap `|Z_{h*}(T) - y|` of the returned control.
    pub residual: f64,
    pub diagnostics: OptimizerDiagnostics,
}

/// Penalized endpoint objective
/// `p -> 1/2 p' G p + pen/2 |Z_p(T) - y|^2`
/// over step-function levels `p` (cell-major, `dim` entries per cell).
///
/// The energy block uses the covariance rectangle identity
/// `<1_(a,b], 1_(c,e]> = R(b,e) - R(a,e) - R(b,c) + R(a,c)`,
/// one Gram matrix shared by all coordinates; its gradient is analytic.
/// The endpoint block is differentiated by central differences.
struct PenalizedEndpoint<'a> {
    model: &'a ModelSpec,
    x0: &'a [f64],
    hurst: f64,
    grid: TimeGrid,
    cells: TimeGrid,
    dim: usize,
    gram: &'a [f64],
    target: &'a [f64],
    penalty: f64,
}

impl PenalizedEndpoint<'_> {
    fn gap_sq(&self, p: &[f64]) -> Result<f64, DeviationError> {
        let h = SteppedFunction::new(self.cells, self.dim, p.to_vec())?;
        let z = skeleton_ldp_raw(self.model, self.x0, &h, self.hurst, &self.grid)?;
        let last = self.grid.n_steps();
        let mut r2 = 0.0;
        for j in 0..self.dim {
            let g = z.value(last, j) - self.target[j];
            r2 += g * g;
        }
        Ok(r2)
    }

    fn energy(&self, p: &[f64]) -> f64 {
        let nc = self.cells.n_steps();
        let d = self.dim;
        let mut acc = 0.0;
        for c in 0..nc {
            for e in 0..nc {
                let g = self.gram[c * nc + e];
                if g == 0.0 {
                    continue;
                }
                for j in 0..d {
                    acc += g * p[c * d + j] * p[e * d + j];
                }
            }
        }
        0.5 * acc
    }

    fn energy_grad(&self, p: &[f64]) -> Vec<f64> {
        let nc = self.cells.n_steps();
        let d = self.dim;
        let mut grad = vec![0.0; nc * d];
        for c in 0..nc {
            for e in 0..nc {
                let g = self.gram[c * nc + e];
                for j in 0..d {
                    grad[c * d + j] += g * p[e * d + j];
                }
            }
        }
        grad
    }

    fn gap_sq_grad(&self, p: &[f64]) -> Result<Vec<f64>, DeviationError> {
        let mut grad = vec![0.0; p.len()];
        let mut work = p.to_vec();
        for k in 0..p.len() {
            let step = 1e-6 * (1.0 + p[k].abs());
            work[k] = p[k] + step;
            let hi = self.gap_sq(&work)?;
            work[k] = p[k] - step;
            let lo = self.gap_sq(&work)?;
            work[k] = p[k];
            grad[k] = (hi - lo) / (2.0 * step);
        }
        Ok(grad)
    }
}

impl CostFunction for PenalizedEndpoint<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> Result<Self::Output, ArgminError> {
        let r2 = self.gap_sq(p).map_err(ArgminError::from)?;
        Ok(self.energy(p) + 0.5 * self.penalty * r2)
    }
}

impl Gradient for PenalizedEndpoint<'_> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, p: &Self::Param) -> Result<Self::Gradient, ArgminError> {
        let mut grad = self.energy_grad(p);
        let pg = self.gap_sq_grad(p).map_err(ArgminError::from)?;
        for (g, q) in grad.iter_mut().zip(pg) {
            *g += 0.5 * self.penalty * q;
        }
        Ok(grad)
    }
}

fn indicator_gram(cells: TimeGrid, hurst: f64) -> Result<Vec<f64>, DeviationError> {
    let nc = cells.n_steps();
    let mut gram = vec![0.0; nc * nc];
    for c in 0..nc {
        let (a, b) = (cells.node(c), cells.node(c + 1));
        for e in c..nc {
            let (u, v) = (cells.node(e), cells.node(e + 1));
            let g = fbm_covariance(b, v, hurst)? - fbm_covariance(a, v, hurst)?
                - fbm_covariance(b, u, hurst)?
                + fbm_covariance(a, u, hurst)?;
            gram[c * nc + e] = g;
            gram[e * nc + c] = g;
        }
    }
    Ok(gram)
}

/// Minimize the control energy `|h|^2 / 2` subject to the skeleton endpoint
/// hitting `target`, by quadratic-penalty continuation with a warm-started
/// L-BFGS inner loop. Non-convergence is reported in the diagnostics along
/// with the best iterate, never as an error.
pub fn rate_endpoint(
    model: &ModelSpec,
    x0: &[f64],
    hurst: f64,
    grid: &TimeGrid,
    target: &[f64],
    options: &RateOptions,
) -> Result<RateResult, DeviationError> {
    let d = model.dim();
    if x0.len() != d || target.len() != d {
        return Err(DeviationError::Shape(format!(
            "x0 / target dimension ({}, {}) must match the model ({d})",
            x0.len(),
            target.len()
        )));
    }
    if options.stages == 0 || options.max_inner_iters == 0 {
        return Err(DeviationError::Domain(
            "need at least one stage and one inner iteration".into(),
        ));
    }
    if !(options.penalty0 > 0.0 && options.penalty_factor >= 1.0 && options.inner_tol > 0.0) {
        return Err(DeviationError::Domain(
            "penalties and tolerances must be positive".into(),
        ));
    }
    let n_cells = options.n_cells.unwrap_or(grid.n_steps());
    if n_cells == 0 || (REFINE * grid.n_steps()) % n_cells != 0 {
        return Err(DeviationError::Domain(format!(
            "n_cells = {n_cells} must be positive and divide the internal cell count {}",
            REFINE * grid.n_steps()
        )));
    }
    let cells = TimeGrid::new(grid.t_end(), n_cells)?;
    let gram = indicator_gram(cells, hurst)?;

    let mut p = vec![0.0; n_cells * d];
    let mut notes = Vec::new();
    let mut inner_iterations = 0u64;
    let mut penalty = options.penalty0;
    let mut stages_run = 0;
    for stage in 0..options.stages {
        if stage > 0 {
            penalty *= options.penalty_factor;
        }
        let problem = PenalizedEndpoint {
            model,
            x0,
            hurst,
            grid: *grid,
            cells,
            dim: d,
            gram: &gram,
            target,
            penalty,
        };
        let solver = LBFGS::new(MoreThuenteLineSearch::new(), 7)
            .with_tolerance_grad(options.inner_tol)
            .map_err(|e| DeviationError::Optimizer(e.to_string()))?;
        let warm = p.clone();
        match Executor::new(problem, solver)
            .configure(|state| state.param(warm).max_iters(options.max_inner_iters))
            .run()
        {
            Ok(res) => {
                inner_iterations += res.state().get_iter();
                if let Some(best) = res.state().get_best_param() {
                    p = best.clone();
                }
            }
            Err(e) => {
                notes.push(format!("stage {stage}: inner solver failed: {e}"));
            }
        }
        stages_run = stage + 1;
    }

    let probe = PenalizedEndpoint {
        model,
        x0,
        hurst,
        grid: *grid,
        cells,
        dim: d,
        gram: &gram,
        target,
        penalty,
    };
    let residual = probe.gap_sq(&p)?.max(0.0).sqrt();
    let converged = residual <= options.residual_tol;
    if !converged {
        notes.push(format!(
            "endpoint gap {residual:.3e} stayed above {:.1e}",
            options.residual_tol
        ));
        let gap_grad = probe.gap_sq_grad(&p)?;
        let gnorm = gap_grad.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm <= 1e-10 * (1.0 + residual * residual) {
            notes.push(
                "endpoint is insensitive to the control; the target may be unreachable \
                 for this diffusion"
                    .into(),
            );
        }
    }

    let control = Control::new(SteppedFunction::new(cells, d, p)?, hurst)?;
    let value = control.cost();
    Ok(RateResult {
        value,
        control,
        residual,
        diagnostics: OptimizerDiagnostics {
            converged,
            stages_run,
            inner_iterations,
            final_penalty: penalty,
            notes,
        },
    })
}
