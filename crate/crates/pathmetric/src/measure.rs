use fbm::{SamplePath, TimeGrid};
use serde::{Deserialize, Serialize};

use crate::error::MetricError;

/// Equal-weight atomic measure on path space: N trajectories on a shared
/// grid, each carrying mass 1/N. Marginals at one or two times are derived
/// views, never materialized separately.
#[derive(Debug, Clone)]
pub struct EmpiricalMeasurePath {
    grid: TimeGrid,
    dim: usize,
    trajectories: Vec<SamplePath>,
}

impl EmpiricalMeasurePath {
    pub fn new(trajectories: Vec<SamplePath>) -> Result<Self, MetricError> {
        let first = trajectories
            .first()
            .ok_or_else(|| MetricError::Domain("need at least one trajectory".into()))?;
        let grid = first.grid();
        let dim = first.dim();
        for (i, p) in trajectories.iter().enumerate() {
            if p.grid() != grid || p.dim() != dim {
                return Err(MetricError::Shape(format!(
                    "trajectory {i} disagrees on grid or dimension"
                )));
            }
        }
        Ok(Self {
            grid,
            dim,
            trajectories,
        })
    }

    /// Point mass at one path, replicated to n atoms so it can be compared
    /// against an n-atom measure.
    pub fn dirac(path: SamplePath, n_atoms: usize) -> Result<Self, MetricError> {
        if n_atoms == 0 {
            return Err(MetricError::Domain("need at least one atom".into()));
        }
        Self::new(vec![path; n_atoms])
    }

    pub fn dirac_zero(grid: TimeGrid, dim: usize, n_atoms: usize) -> Result<Self, MetricError> {
        Self::dirac(SamplePath::zeros(grid, dim), n_atoms)
    }

    pub fn n_atoms(&self) -> usize {
        self.trajectories.len()
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trajectory(&self, i: usize) -> &SamplePath {
        &self.trajectories[i]
    }

    pub fn trajectories(&self) -> &[SamplePath] {
        &self.trajectories
    }

    /// Atoms of the time-t_k marginal.
    pub fn marginal(&self, k: usize) -> Vec<Vec<f64>> {
        self.trajectories
            .iter()
            .map(|p| p.node_values(k).to_vec())
            .collect()
    }
}

/// Coupling between two N-atom equal-weight measures.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    n: usize,
    weights: Vec<f64>, // row-major N x N
}

const MARGINAL_TOL: f64 = 1e-9;

impl TransportPlan {
    pub fn new(n: usize, weights: Vec<f64>) -> Result<Self, MetricError> {
        if n == 0 || weights.len() != n * n {
            return Err(MetricError::Shape(format!(
                "weights length {} != n^2 = {}",
                weights.len(),
                n * n
            )));
        }
        let mut weights = weights;
        for w in &mut weights {
            if *w < 0.0 {
                if *w < -1e-12 {
                    return Err(MetricError::Domain(format!("negative plan entry {w}")));
                }
                *w = 0.0;
            }
        }
        let target = 1.0 / n as f64;
        for i in 0..n {
            let row: f64 = weights[i * n..(i + 1) * n].iter().sum();
            let col: f64 = (0..n).map(|r| weights[r * n + i]).sum();
            if (row - target).abs() > MARGINAL_TOL || (col - target).abs() > MARGINAL_TOL {
                return Err(MetricError::Domain(format!(
                    "marginal {i} off target: row {row}, col {col}"
                )));
            }
        }
        Ok(Self { n, weights })
    }

    pub fn from_permutation(perm: &[usize]) -> Result<Self, MetricError> {
        let n = perm.len();
        let mut weights = vec![0.0; n * n];
        for (i, &j) in perm.iter().enumerate() {
            weights[i * n + j] = 1.0 / n as f64;
        }
        Self::new(n, weights)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Plan cost against a row-major N x N cost matrix.
    pub fn cost(&self, cost: &[f64]) -> f64 {
        self.weights.iter().zip(cost).map(|(w, c)| w * c).sum()
    }
}

/// One evaluated grid pair in a metric report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairMetric {
    pub s1: usize,
    pub s2: usize,
    pub w2: f64,
    pub wc: f64,
}

/// Decomposition of the Hölder-Wasserstein distance: sup-Wasserstein part,
/// the Hölder-weighted increment part, and their sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub w2_sup: f64,
    pub wc_sup_ratio: f64,
    pub combined: f64,
    pub pairs: Vec<PairMetric>,
}

/// Mean squared trajectory increment between two grid times: the membership
/// quantity of the increment law against |.|^2.
pub fn mean_sq_increment(
    mu: &EmpiricalMeasurePath,
    s1: usize,
    s2: usize,
) -> Result<f64, MetricError> {
    check_pair(mu.grid(), s1, s2)?;
    let n = mu.n_atoms() as f64;
    let mut total = 0.0;
    for p in mu.trajectories() {
        let a = p.node_values(s1);
        let b = p.node_values(s2);
        total += a
            .iter()
            .zip(b)
            .map(|(x, y)| (y - x) * (y - x))
            .sum::<f64>();
    }
    Ok(total / n)
}

pub(crate) fn check_pair(grid: TimeGrid, s1: usize, s2: usize) -> Result<(), MetricError> {
    if s1 >= s2 || s2 > grid.n_steps() {
        return Err(MetricError::Domain(format!(
            "need grid indices s1 < s2 <= {}, got ({s1}, {s2})",
            grid.n_steps()
        )));
    }
    Ok(())
}

/// Grid pairs over which increment suprema are taken: every (s1, s2) for
/// small grids, all dyadic spans above 256 steps (the per-pair transport
/// solves are the cost hotspot, and dyadic spans keep the schedule at
/// O(n log n) while still probing every scale).
pub(crate) fn pair_schedule(n_steps: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    if n_steps <= 256 {
        for s1 in 0..n_steps {
            for s2 in (s1 + 1)..=n_steps {
                pairs.push((s1, s2));
            }
        }
    } else {
        let mut span = 1;
        while span <= n_steps {
            for s1 in 0..=(n_steps - span) {
                pairs.push((s1, s1 + span));
            }
            span *= 2;
        }
        pairs.sort_unstable();
        pairs.dedup();
    }
    pairs
}

/// Hölder norm of a measure path against the zero measure:
/// sqrt(mean sup-norm^2) plus the largest Hölder-weighted rms increment.
pub fn measure_holder_norm(mu: &EmpiricalMeasurePath, beta: f64) -> Result<f64, MetricError> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(MetricError::Domain(format!(
            "holder exponent must lie in (0,1), got {beta}"
        )));
    }
    let grid = mu.grid();
    let n_atoms = mu.n_atoms() as f64;
    let mut sup_sq = 0.0;
    for p in mu.trajectories() {
        let mut best = 0.0f64;
        for k in 0..=grid.n_steps() {
            best = best.max(p.node_norm(k).powi(2));
        }
        sup_sq += best;
    }
    let mut ratio = 0.0f64;
    for (s1, s2) in pair_schedule(grid.n_steps()) {
        let rms = mean_sq_increment(mu, s1, s2)?.sqrt();
        ratio = ratio.max(rms / (grid.node(s2) - grid.node(s1)).powf(beta));
    }
    Ok((sup_sq / n_atoms).sqrt() + ratio)
}
