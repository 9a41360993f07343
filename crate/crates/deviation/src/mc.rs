use fbm::{sample_fbm, FbmMethod, FbmSamplerConfig, SamplePath, StreamFactory, TimeGrid};
use meanfield::{
    choose_exponents, law_fixpoint_driven, particle_system_driven, solve_frozen_many, ModelSpec,
    WindowPolicy,
};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::DeviationError;

/// Which deviation regime the Monte Carlo event lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationMode {
    Ldp,
    Mdp,
}

/// Moderate-deviation speed `zeta(eps) = eps^{-exponent}`. Admissible
/// exponents sit strictly between 0 and the Hurst index, so that
/// `zeta -> infinity` while `eps^H zeta -> 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaSpec {
    pub exponent: f64,
}

impl ZetaSpec {
    /// Midpoint speed `zeta(eps) = eps^{-H/2}`.
    pub fn default_for(hurst: f64) -> Self {
        Self {
            exponent: 0.5 * hurst,
        }
    }

    pub fn value(&self, eps: f64) -> f64 {
        eps.powf(-self.exponent)
    }

    fn validate(&self, hurst: f64, eps_list: &[f64]) -> Result<(), DeviationError> {
        if !(self.exponent > 0.0 && self.exponent < hurst) {
            return Err(DeviationError::Domain(format!(
                "zeta exponent must lie in (0, {hurst}), got {}",
                self.exponent
            )));
        }
        for &eps in eps_list {
            let z = self.value(eps);
            if z < 1.0 - 1e-12 {
                return Err(DeviationError::Domain(format!(
                    "zeta({eps}) = {z} < 1; moderate scaling needs eps <= 1"
                )));
            }
            if eps.powf(hurst) * z > 1.0 + 1e-12 {
                return Err(DeviationError::Domain(format!(
                    "eps^H zeta(eps) = {} > 1 at eps = {eps}",
                    eps.powf(hurst) * z
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsilonEstimate {
    pub epsilon: f64,
    pub n_samples: usize,
    pub hits: usize,
    pub p_hat: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// `-eps^{2H} log p_hat` (large deviations) or `-zeta^{-2} log p_hat`
    /// (moderate deviations); absent when the count is degenerate.
    pub transformed: Option<f64>,
    /// All replicas hit, or none did; the transform is then meaningless.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeviationEstimate {
    pub mode: DeviationMode,
    pub delta: f64,
    pub zeta: Option<ZetaSpec>,
    pub per_epsilon: Vec<EpsilonEstimate>,
}

/// Log-log regression of the mean squared sup deviation against eps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceRate {
    pub slope: f64,
    pub log_eps: Vec<f64>,
    pub log_mean_sq: Vec<f64>,
}

const LAW_PARTICLES: usize = 256;
const LAW_MAX_ITER: usize = 64;
const LAW_TOL: f64 = 1e-4;
const WILSON_Z: f64 = 1.96;

fn wilson(hits: usize, n: usize) -> (f64, f64, f64) {
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    (p, (center - half).max(0.0), (center + half).min(1.0))
}

fn sup_gap(path: &SamplePath, baseline: &SamplePath) -> f64 {
    let d = path.dim();
    let mut best = 0.0f64;
    for k in 0..=path.grid().n_steps() {
        let mut acc = 0.0;
        for j in 0..d {
            let g = path.value(k, j) - baseline.value(k, j);
            acc += g * g;
        }
        best = best.max(acc);
    }
    best.sqrt()
}

struct McSetup {
    baseline: SamplePath,
    law_base: Vec<SamplePath>,
    rep_base: Vec<SamplePath>,
    law_x0s: Vec<Vec<f64>>,
    rep_x0s: Vec<Vec<f64>>,
    exps: meanfield::ExponentSet,
}

/// Shared preparation: the zero-noise Euler baseline, the unscaled driver
/// batches for the law particles and the replicas (separate seed streams),
/// and constant initial points. The bases are sampled once and rescaled per
/// eps, so every eps sees the same underlying randomness.
fn mc_setup(
    model: &ModelSpec,
    x0: &[f64],
    hurst: f64,
    grid: &TimeGrid,
    eps_list: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<McSetup, DeviationError> {
    let d = model.dim();
    if x0.len() != d {
        return Err(DeviationError::Shape(format!(
            "x0 has dimension {}, model expects {d}",
            x0.len()
        )));
    }
    if eps_list.is_empty() {
        return Err(DeviationError::Domain("eps list must be non-empty".into()));
    }
    if eps_list.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(DeviationError::Domain(
            "every eps must be finite and positive".into(),
        ));
    }
    if n_samples < 2 {
        return Err(DeviationError::Domain("need at least two samples".into()));
    }
    let exps = choose_exponents(hurst, None)?;

    let zero_noise = SamplePath::zeros(*grid, d);
    let base = particle_system_driven(model, std::slice::from_ref(&zero_noise), &[x0.to_vec()])?;
    let baseline = base.trajectory(0).clone();

    let factory = StreamFactory::new(seed);
    let law_seed = factory.stream("mc-law", 0).next_u64();
    let rep_seed = factory.stream("mc-replica", 0).next_u64();
    let law_cfg = FbmSamplerConfig::new(hurst, FbmMethod::Circulant, law_seed);
    let rep_cfg = FbmSamplerConfig::new(hurst, FbmMethod::Circulant, rep_seed);
    let law_base = sample_fbm(*grid, d, LAW_PARTICLES, &law_cfg)?.paths;
    let rep_base = sample_fbm(*grid, d, n_samples, &rep_cfg)?.paths;

    Ok(McSetup {
        baseline,
        law_base,
        rep_base,
        law_x0s: vec![x0.to_vec(); LAW_PARTICLES],
        rep_x0s: vec![x0.to_vec(); n_samples],
        exps,
    })
}

fn scaled(paths: &[SamplePath], c: f64) -> Vec<SamplePath> {
    paths
        .iter()
        .map(|p| {
            let mut q = p.clone();
            q.scale(c);
            q
        })
        .collect()
}

/// Sup-norm deviation statistics of the replicas at one eps: freeze the law
/// at noise scale `eps^H`, solve every replica against it, and measure the
/// sup distance to the zero-noise baseline.
fn deviation_stats(
    model: &ModelSpec,
    setup: &McSetup,
    eps: f64,
    hurst: f64,
) -> Result<Vec<f64>, DeviationError> {
    let scale = eps.powf(hurst);
    let law_noises = scaled(&setup.law_base, scale);
    let (law, _) = law_fixpoint_driven(
        model,
        &setup.exps,
        &law_noises,
        &setup.law_x0s,
        LAW_MAX_ITER,
        LAW_TOL,
        WindowPolicy::MeasuredHalving,
    )?;
    let rep_noises = scaled(&setup.rep_base, scale);
    let paths = solve_frozen_many(model, &law, &rep_noises, &setup.rep_x0s)?;
    Ok(paths
        .iter()
        .map(|p| sup_gap(p, &setup.baseline))
        .collect())
}

/// Monte Carlo estimate of the deviation probabilities
/// `P(|X^eps - X^0|_sup >= delta)` (large deviations) or the same event for
/// the rescaled fluctuation `(X^eps - X^0) / (eps^H zeta(eps))` (moderate
/// deviations), across a list of noise scales.
///
/// Replicas solve the law-frozen equation against a fixed-point law computed
/// at the same scale, all from seed-derived streams, so the output is
/// reproducible bit for bit.
#[allow(clippy::too_many_arguments)]
pub fn mc_deviation_probability(
    model: &ModelSpec,
    x0: &[f64],
    hurst: f64,
    grid: &TimeGrid,
    eps_list: &[f64],
    delta: f64,
    n_samples: usize,
    mode: DeviationMode,
    zeta: Option<ZetaSpec>,
    seed: u64,
) -> Result<DeviationEstimate, DeviationError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(DeviationError::Domain(
            "delta must be positive and finite".into(),
        ));
    }
    let zeta = match mode {
        DeviationMode::Ldp => None,
        DeviationMode::Mdp => {
            let z = zeta.unwrap_or_else(|| ZetaSpec::default_for(hurst));
            z.validate(hurst, eps_list)?;
            Some(z)
        }
    };
    let setup = mc_setup(model, x0, hurst, grid, eps_list, n_samples, seed)?;

    let mut per_epsilon = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let stats = deviation_stats(model, &setup, eps, hurst)?;
        let threshold_scale = match (mode, zeta) {
            (DeviationMode::Ldp, _) => 1.0,
            (DeviationMode::Mdp, Some(z)) => eps.powf(hurst) * z.value(eps),
            (DeviationMode::Mdp, None) => unreachable!(),
        };
        let hits = stats
            .iter()
            .filter(|&&s| s / threshold_scale >= delta)
            .count();
        let (p_hat, wilson_low, wilson_high) = wilson(hits, n_samples);
        let degenerate = hits == 0 || hits == n_samples;
        let transformed = if degenerate {
            None
        } else {
            Some(match (mode, zeta) {
                (DeviationMode::Ldp, _) => -eps.powf(2.0 * hurst) * p_hat.ln(),
                (DeviationMode::Mdp, Some(z)) => {
                    let zv = z.value(eps);
                    -p_hat.ln() / (zv * zv)
                }
                (DeviationMode::Mdp, None) => unreachable!(),
            })
        };
        per_epsilon.push(EpsilonEstimate {
            epsilon: eps,
            n_samples,
            hits,
            p_hat,
            wilson_low,
            wilson_high,
            transformed,
            degenerate,
        });
    }
    Ok(DeviationEstimate {
        mode,
        delta,
        zeta,
        per_epsilon,
    })
}

/// Least-squares slope of `log E|X^eps - X^0|_sup^2` against `log eps`.
/// The eps list must contain at least two scales spanning a decade; all
/// scales share the same underlying noise, so the regression sees the pure
/// eps dependence rather than resampling variance.
pub fn convergence_rate_check(
    model: &ModelSpec,
    x0: &[f64],
    hurst: f64,
    grid: &TimeGrid,
    eps_list: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<ConvergenceRate, DeviationError> {
    if eps_list.len() < 2 {
        return Err(DeviationError::Domain(
            "rate regression needs at least two eps values".into(),
        ));
    }
    let setup = mc_setup(model, x0, hurst, grid, eps_list, n_samples, seed)?;
    let lo = eps_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eps_list.iter().cloned().fold(0.0f64, f64::max);
    if hi / lo < 10.0 - 1e-9 {
        return Err(DeviationError::Domain(format!(
            "eps range [{lo}, {hi}] must span at least one decade"
        )));
    }

    let mut log_eps = Vec::with_capacity(eps_list.len());
    let mut log_mean_sq = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let stats = deviation_stats(model, &setup, eps, hurst)?;
        let mean_sq = stats.iter().map(|s| s * s).sum::<f64>() / stats.len() as f64;
        if !(mean_sq > 0.0) {
            return Err(DeviationError::Degenerate(format!(
                "replicas coincide with the limit path at eps = {eps}"
            )));
        }
        log_eps.push(eps.ln());
        log_mean_sq.push(mean_sq.ln());
    }

    let n = log_eps.len() as f64;
    let mx = log_eps.iter().sum::<f64>() / n;
    let my = log_mean_sq.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in log_eps.iter().zip(&log_mean_sq) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    Ok(ConvergenceRate {
        slope: sxy / sxx,
        log_eps,
        log_mean_sq,
    })
}
