use std::time::Instant;

use fbm::{holder_seminorm, sample_fbm, FbmSamplerConfig, SamplePath, StreamFactory, TimeGrid};
use pathmetric::{holder_wasserstein, measure_holder_norm, EmpiricalMeasurePath};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{contraction_step, lambda_constants};
use crate::error::MeanFieldError;
use crate::exponents::ExponentSet;
use crate::frozen::{drive_frozen, X0Sampler};
use crate::model::{MarginalAtoms, ModelSpec};

/// How the fixed-point iteration chooses its sub-window lengths.
///
/// `MeasuredHalving` (default) starts from the full horizon and halves
/// whenever the measured iteration stops contracting or runs out of sweeps;
/// an accepted length is kept for the remaining windows. The theoretical
/// step length depends on unobservable Holder norms, so measured ratios are
/// the operational truth. `TheoreticalDelta` evaluates the contraction-step
/// bracket on realized seminorms instead and uses that (usually much
/// shorter) window, still falling back to halving if an attempt stalls.
///
/// Halving always terminates: with the left-point scheme, node k of a sweep
/// depends only on marginals strictly before k, so a window of `w` steps is
/// exactly self-consistent after at most `w` sweeps and a one-step window
/// after a single sweep (distance identically zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowPolicy {
    #[default]
    MeasuredHalving,
    TheoreticalDelta,
}

/// Run record of a law-freeze fixed-point iteration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixpointReport {
    /// Total number of fixed-point map applications that were measured
    /// (window bootstraps are initialization and not counted).
    pub iterations: usize,
    /// Holder-Wasserstein distance between consecutive iterates, in order,
    /// including iterations from window attempts that were later halved.
    pub distances: Vec<f64>,
    /// Consecutive distance ratios within a window attempt; reported only
    /// when the previous distance is positive.
    pub ratios: Vec<f64>,
    /// Time lengths of the accepted windows, in order.
    pub window_lengths: Vec<f64>,
    /// Last inter-iterate distance of the final window.
    pub final_residual: f64,
    pub wall_time_sec: f64,
    /// False when some one-step window still failed to reach `tol` within
    /// `max_iter` sweeps. Defensive: a one-step window of the left-point
    /// scheme is exactly self-consistent after one sweep, so this cannot
    /// trigger unless the scheme changes.
    pub converged: bool,
}

/// Law-freeze fixed-point solver: fixes `n_particles` noises and initial
/// points once, then iterates mu -> empirical law of the frozen solves,
/// window by window. Within a window the previous converged state is the
/// initial condition and the first iterate is bootstrapped from the constant
/// continuation of that state.
///
/// Returns the concatenated measure path and the run record. Non-convergence
/// (a one-step window exhausting `max_iter`) is reported through
/// `FixpointReport::converged`, not as an error; beyond the failed window the
/// trajectories keep their frozen initial states.
#[allow(clippy::too_many_arguments)]
pub fn law_fixpoint(
    model: &ModelSpec,
    exps: &ExponentSet,
    config: &FbmSamplerConfig,
    x0_sampler: &X0Sampler,
    grid: &TimeGrid,
    n_particles: usize,
    max_iter: usize,
    tol: f64,
    policy: WindowPolicy,
) -> Result<(EmpiricalMeasurePath, FixpointReport), MeanFieldError> {
    if n_particles == 0 {
        return Err(MeanFieldError::Domain("n_particles must be >= 1".into()));
    }
    let sample = sample_fbm(*grid, model.dim(), n_particles, config)?;
    let factory = StreamFactory::new(config.seed);
    let x0s = x0_sampler.sample(&factory, n_particles, model.dim())?;
    law_fixpoint_driven(model, exps, &sample.paths, &x0s, max_iter, tol, policy)
}

/// Fixed-point iteration against caller-supplied noises and initial points.
/// This is the deterministic core of `law_fixpoint`.
pub fn law_fixpoint_driven(
    model: &ModelSpec,
    exps: &ExponentSet,
    noises: &[SamplePath],
    x0s: &[Vec<f64>],
    max_iter: usize,
    tol: f64,
    policy: WindowPolicy,
) -> Result<(EmpiricalMeasurePath, FixpointReport), MeanFieldError> {
    let start_time = Instant::now();
    exps.validate()?;
    if max_iter == 0 {
        return Err(MeanFieldError::Domain("max_iter must be >= 1".into()));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(MeanFieldError::Domain("tol must be positive".into()));
    }
    let d = model.dim();
    let n_particles = noises.len();
    if n_particles == 0 || x0s.len() != n_particles {
        return Err(MeanFieldError::Shape(format!(
            "need matching non-empty noises and x0s, got {} and {}",
            n_particles,
            x0s.len()
        )));
    }
    let grid = noises[0].grid();
    if noises.iter().any(|p| p.grid() != grid || p.dim() != d) {
        return Err(MeanFieldError::Shape(
            "all noises must share the grid and the model dimension".into(),
        ));
    }
    if x0s.iter().any(|x| x.len() != d) {
        return Err(MeanFieldError::Shape("x0 dimension mismatch".into()));
    }

    let n = grid.n_steps();
    let dt = grid.dt();
    // Solved trajectories; beyond the solved front each particle sits at its
    // initial point (the constant-law starting guess).
    let mut current: Vec<SamplePath> = x0s
        .iter()
        .map(|x0| {
            let mut p = SamplePath::zeros(grid, d);
            for k in 0..=n {
                p.node_values_mut(k).copy_from_slice(x0);
            }
            p
        })
        .collect();

    let mut distances = Vec::new();
    let mut ratios = Vec::new();
    let mut window_lengths = Vec::new();
    let mut iterations = 0usize;
    let mut converged = true;

    let mut a = 0usize;
    let mut win = n;
    while a < n {
        let remaining = n - a;
        win = win.min(remaining).max(1);
        if policy == WindowPolicy::TheoreticalDelta {
            win = theoretical_window(model, exps, noises, &current, a, dt)?.min(remaining);
        }
        loop {
            let wgrid = TimeGrid::new(dt * win as f64, win)?;
            let starts: Vec<Vec<f64>> = current
                .iter()
                .map(|tr| tr.node_values(a).to_vec())
                .collect();
            // Bootstrap iterate: frozen solves against the constant
            // continuation of the window's start states.
            let const_marg = vec![MarginalAtoms::new(starts.clone())?; win + 1];
            let mut prev = sweep(model, noises, &starts, a, wgrid, &const_marg, dt)?;
            let mut prev_d: Option<f64> = None;
            let mut accepted = false;
            for _ in 1..=max_iter {
                let marg = window_marginals(&prev, win)?;
                let next = sweep(model, noises, &starts, a, wgrid, &marg, dt)?;
                let dist = window_distance(&prev, &next, exps.beta)?;
                iterations += 1;
                distances.push(dist);
                if let Some(p) = prev_d {
                    if p > 0.0 {
                        ratios.push(dist / p);
                    }
                }
                let stalled = prev_d.map_or(false, |p| dist >= p);
                prev = next;
                if dist < tol {
                    accepted = true;
                    break;
                }
                if stalled {
                    break;
                }
                prev_d = Some(dist);
            }
            if accepted || win == 1 {
                for (tr, w) in current.iter_mut().zip(&prev) {
                    for k in 1..=win {
                        for j in 0..d {
                            tr.set(a + k, j, w.value(k, j));
                        }
                    }
                }
                window_lengths.push(dt * win as f64);
                if !accepted {
                    converged = false;
                }
                a += win;
                break;
            }
            win /= 2;
        }
        if !converged {
            break;
        }
    }

    let final_residual = distances.last().copied().unwrap_or(0.0);
    let report = FixpointReport {
        iterations,
        distances,
        ratios,
        window_lengths,
        final_residual,
        wall_time_sec: start_time.elapsed().as_secs_f64(),
        converged,
    };
    Ok((EmpiricalMeasurePath::new(current)?, report))
}

/// One fixed-point sweep on the window `[a, a+win]`: every particle solves
/// its frozen equation against the shared per-node marginals.
fn sweep(
    model: &ModelSpec,
    noises: &[SamplePath],
    starts: &[Vec<f64>],
    a: usize,
    wgrid: TimeGrid,
    marginals: &[MarginalAtoms],
    dt: f64,
) -> Result<Vec<SamplePath>, MeanFieldError> {
    let d = model.dim();
    noises
        .par_iter()
        .zip(starts.par_iter())
        .map(|(noise, x0)| {
            let values = drive_frozen(model, marginals, noise, a, x0, dt)?;
            Ok(SamplePath::new(wgrid, d, values)?)
        })
        .collect()
}

fn window_marginals(
    paths: &[SamplePath],
    win: usize,
) -> Result<Vec<MarginalAtoms>, MeanFieldError> {
    (0..=win)
        .map(|k| MarginalAtoms::new(paths.iter().map(|p| p.node_values(k).to_vec()).collect()))
        .collect()
}

fn window_distance(
    prev: &[SamplePath],
    next: &[SamplePath],
    beta: f64,
) -> Result<f64, MeanFieldError> {
    let mu = EmpiricalMeasurePath::new(prev.to_vec())?;
    let nu = EmpiricalMeasurePath::new(next.to_vec())?;
    Ok(holder_wasserstein(&mu, &nu, beta)?.combined)
}

/// Window length from the contraction-step bracket, evaluated on realized
/// quantities: the max noise seminorm over the remaining horizon and the
/// trajectory/measure norms of a constant-law bootstrap solve.
fn theoretical_window(
    model: &ModelSpec,
    exps: &ExponentSet,
    noises: &[SamplePath],
    current: &[SamplePath],
    a: usize,
    dt: f64,
) -> Result<usize, MeanFieldError> {
    let n = noises[0].grid().n_steps();
    let remaining = n - a;
    let remaining_time = dt * remaining as f64;
    let mut bh = 0f64;
    for p in noises {
        bh = bh.max(holder_seminorm(p, a, n, exps.beta1)?);
    }
    let wgrid = TimeGrid::new(remaining_time, remaining)?;
    let starts: Vec<Vec<f64>> = current
        .iter()
        .map(|tr| tr.node_values(a).to_vec())
        .collect();
    let const_marg = vec![MarginalAtoms::new(starts.clone())?; remaining + 1];
    let boot = sweep(model, noises, &starts, a, wgrid, &const_marg, dt)?;
    let mut x_holder = 0f64;
    for p in &boot {
        x_holder = x_holder.max(holder_seminorm(p, 0, remaining, exps.beta)?);
    }
    let mu = EmpiricalMeasurePath::new(boot)?;
    let norm = measure_holder_norm(&mu, exps.beta)?;
    let lams = lambda_constants(model, exps, x_holder, x_holder, norm, norm)?;
    let delta = contraction_step(
        &lams,
        model.constants.drift_lipschitz,
        bh,
        exps,
        remaining_time,
    )?;
    Ok(((delta / dt).floor() as usize).clamp(1, remaining))
}
