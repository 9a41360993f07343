use fbm::{sample_fbm, FbmSamplerConfig, SamplePath, StreamFactory, TimeGrid};
use pathmetric::EmpiricalMeasurePath;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::MeanFieldError;
use crate::model::{MarginalAtoms, ModelSpec};

/// Euler states whose norm passes this guard abort the solve; the scheme is
/// considered blown up.
pub const BLOW_UP_NORM: f64 = 1e12;

/// Initial-condition sampler. Draws are taken from a dedicated labelled
/// stream of the run's `StreamFactory`, so they never collide with the noise
/// streams and are reproducible for a fixed seed.
#[derive(Debug, Clone)]
pub enum X0Sampler {
    Constant(Vec<f64>),
    Gaussian { mean: Vec<f64>, sd: f64 },
}

impl X0Sampler {
    pub fn sample(
        &self,
        factory: &StreamFactory,
        n: usize,
        dim: usize,
    ) -> Result<Vec<Vec<f64>>, MeanFieldError> {
        match self {
            X0Sampler::Constant(x0) => {
                if x0.len() != dim {
                    return Err(MeanFieldError::Shape(format!(
                        "constant x0 has dimension {}, expected {dim}",
                        x0.len()
                    )));
                }
                Ok(vec![x0.clone(); n])
            }
            X0Sampler::Gaussian { mean, sd } => {
                if mean.len() != dim {
                    return Err(MeanFieldError::Shape(format!(
                        "gaussian mean has dimension {}, expected {dim}",
                        mean.len()
                    )));
                }
                if !(sd.is_finite() && *sd >= 0.0) {
                    return Err(MeanFieldError::Domain("gaussian sd must be >= 0".into()));
                }
                let mut out = Vec::with_capacity(n);
                for i in 0..n {
                    let mut rng = factory.stream("x0", i as u64);
                    let mut x = Vec::with_capacity(dim);
                    for j in 0..dim {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        x.push(mean[j] + sd * z);
                    }
                    out.push(x);
                }
                Ok(out)
            }
        }
    }
}

pub(crate) struct EulerScratch {
    pub b: Vec<f64>,
    pub s: Vec<f64>,
}

impl EulerScratch {
    pub fn new(d: usize) -> Self {
        Self {
            b: vec![0.0; d],
            s: vec![0.0; d * d],
        }
    }
}

/// One left-point Euler step x += b dt + sigma db in place.
pub(crate) fn euler_step(
    model: &ModelSpec,
    x: &mut [f64],
    mu: &MarginalAtoms,
    db: &[f64],
    dt: f64,
    step: usize,
    scratch: &mut EulerScratch,
) -> Result<(), MeanFieldError> {
    let d = model.dim();
    model.drift(x, mu, &mut scratch.b);
    model.diffusion(x, mu, &mut scratch.s);
    if scratch.b.iter().chain(scratch.s.iter()).any(|v| !v.is_finite()) {
        return Err(MeanFieldError::NonFinite(format!(
            "drift/diffusion non-finite at step {step}"
        )));
    }
    let mut norm_sq = 0.0;
    for i in 0..d {
        let mut noise = 0.0;
        for j in 0..d {
            noise += scratch.s[i * d + j] * db[j];
        }
        x[i] += scratch.b[i] * dt + noise;
        norm_sq += x[i] * x[i];
    }
    if !norm_sq.is_finite() || norm_sq.sqrt() > BLOW_UP_NORM {
        return Err(MeanFieldError::BlowUp {
            step,
            norm: norm_sq.sqrt(),
        });
    }
    Ok(())
}

/// Euler drive against a fixed per-node marginal sequence, starting from
/// `x0` at node `start` of `noise` and running for `marginals.len() - 1`
/// steps. Used by both the frozen solver and the fixed-point window sweeps.
pub(crate) fn drive_frozen(
    model: &ModelSpec,
    marginals: &[MarginalAtoms],
    noise: &SamplePath,
    start: usize,
    x0: &[f64],
    dt: f64,
) -> Result<Vec<f64>, MeanFieldError> {
    let d = model.dim();
    let win = marginals.len() - 1;
    let mut values = Vec::with_capacity((win + 1) * d);
    let mut x = x0.to_vec();
    values.extend_from_slice(&x);
    let mut scratch = EulerScratch::new(d);
    let mut db = vec![0.0; d];
    for k in 0..win {
        for j in 0..d {
            db[j] = noise.value(start + k + 1, j) - noise.value(start + k, j);
        }
        euler_step(model, &mut x, &marginals[k], &db, dt, k, &mut scratch)?;
        values.extend_from_slice(&x);
    }
    Ok(values)
}

/// Solve the frozen-law equation dX = b(X, law_t) dt + sigma(X, law_t) dB^H
/// by the left-point Euler scheme (pathwise Young semantics, valid for
/// H > 1/2). The law enters only through its per-node marginals.
pub fn solve_frozen(
    model: &ModelSpec,
    law: &EmpiricalMeasurePath,
    noise: &SamplePath,
    x0: &[f64],
) -> Result<SamplePath, MeanFieldError> {
    let d = model.dim();
    if law.dim() != d || noise.dim() != d || x0.len() != d {
        return Err(MeanFieldError::Shape(format!(
            "dimension mismatch: law {}, noise {}, x0 {}, model {d}",
            law.dim(),
            noise.dim(),
            x0.len()
        )));
    }
    if law.grid() != noise.grid() {
        return Err(MeanFieldError::Shape(
            "law and noise must share the time grid".into(),
        ));
    }
    let grid = noise.grid();
    let marginals: Vec<MarginalAtoms> = (0..=grid.n_steps())
        .map(|k| MarginalAtoms::new(law.marginal(k)))
        .collect::<Result<_, _>>()?;
    let values = drive_frozen(model, &marginals, noise, 0, x0, grid.dt())?;
    Ok(SamplePath::new(grid, d, values)?)
}

/// Interacting particle system with i.i.d. driving noises, one per particle.
/// Every particle performs the Euler step against the empirical marginal of
/// the current particle cloud.
///
/// Deterministic for a fixed `(config, grid, n_particles, x0_sampler)`
/// regardless of thread count: particle updates are pure and indexed.
pub fn particle_system(
    model: &ModelSpec,
    n_particles: usize,
    grid: &TimeGrid,
    config: &FbmSamplerConfig,
    x0_sampler: &X0Sampler,
) -> Result<EmpiricalMeasurePath, MeanFieldError> {
    if n_particles == 0 {
        return Err(MeanFieldError::Domain("n_particles must be >= 1".into()));
    }
    let sample = sample_fbm(*grid, model.dim(), n_particles, config)?;
    let factory = StreamFactory::new(config.seed);
    let x0s = x0_sampler.sample(&factory, n_particles, model.dim())?;
    particle_system_driven(model, &sample.paths, &x0s)
}

/// Particle system driven by caller-supplied noises (one path per particle).
/// This is the deterministic core of `particle_system`; it also lets tests
/// refine the grid while keeping the underlying noise realization fixed.
pub fn particle_system_driven(
    model: &ModelSpec,
    noises: &[SamplePath],
    x0s: &[Vec<f64>],
) -> Result<EmpiricalMeasurePath, MeanFieldError> {
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
    let mut states: Vec<Vec<f64>> = x0s.to_vec();
    let mut trajectories: Vec<SamplePath> = (0..n_particles)
        .map(|_| SamplePath::zeros(grid, d))
        .collect();
    for (traj, x0) in trajectories.iter_mut().zip(x0s) {
        traj.node_values_mut(0).copy_from_slice(x0);
    }

    for k in 0..n {
        let mu = MarginalAtoms::new(states.clone())?;
        let stepped: Result<Vec<Vec<f64>>, MeanFieldError> = states
            .par_iter()
            .enumerate()
            .map(|(i, x)| {
                let mut xi = x.clone();
                let mut scratch = EulerScratch::new(d);
                let mut db = vec![0.0; d];
                for j in 0..d {
                    db[j] = noises[i].value(k + 1, j) - noises[i].value(k, j);
                }
                euler_step(model, &mut xi, &mu, &db, dt, k, &mut scratch)?;
                Ok(xi)
            })
            .collect();
        states = stepped?;
        for (traj, x) in trajectories.iter_mut().zip(&states) {
            traj.node_values_mut(k + 1).copy_from_slice(x);
        }
    }
    Ok(EmpiricalMeasurePath::new(trajectories)?)
}

/// Batch frozen solves against a common law: the per-node marginals are
/// assembled once and shared across all replicas, which is what dominates a
/// one-at-a-time loop over [`solve_frozen`] for large replica counts.
pub fn solve_frozen_many(
    model: &ModelSpec,
    law: &EmpiricalMeasurePath,
    noises: &[SamplePath],
    x0s: &[Vec<f64>],
) -> Result<Vec<SamplePath>, MeanFieldError> {
    let d = model.dim();
    if law.dim() != d {
        return Err(MeanFieldError::Shape(format!(
            "law has dimension {}, model expects {d}",
            law.dim()
        )));
    }
    if noises.len() != x0s.len() {
        return Err(MeanFieldError::Shape(format!(
            "{} noises vs {} initial points",
            noises.len(),
            x0s.len()
        )));
    }
    let grid = law.grid();
    if noises.iter().any(|p| p.grid() != grid || p.dim() != d) {
        return Err(MeanFieldError::Shape(
            "every noise must live on the law's grid with the model dimension".into(),
        ));
    }
    if x0s.iter().any(|x| x.len() != d) {
        return Err(MeanFieldError::Shape("initial point dimension mismatch".into()));
    }
    let marginals: Vec<MarginalAtoms> = (0..=grid.n_steps())
        .map(|k| MarginalAtoms::new(law.marginal(k)))
        .collect::<Result<_, _>>()?;
    noises
        .par_iter()
        .zip(x0s.par_iter())
        .map(|(noise, x0)| {
            let values = drive_frozen(model, &marginals, noise, 0, x0, grid.dt())?;
            Ok(SamplePath::new(grid, d, values)?)
        })
        .collect()
}
