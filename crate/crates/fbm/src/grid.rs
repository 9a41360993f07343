use serde::{Deserialize, Serialize};

use crate::error::FbmError;

/// Uniform grid `t_k = k * t_end / n_steps`, `k = 0..=n_steps`.
///
/// Sub-intervals are always referred to by node indices, never by raw times,
/// so every consumer of a path shares the exact same float nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, n_steps: usize) -> Result<Self, FbmError> {
        if !t_end.is_finite() || t_end <= 0.0 {
            return Err(FbmError::InvalidGrid(format!(
                "t_end must be positive and finite, got {t_end}"
            )));
        }
        if n_steps == 0 {
            return Err(FbmError::InvalidGrid("n_steps must be >= 1".into()));
        }
        Ok(Self { t_end, n_steps })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of nodes, `n_steps + 1`.
    pub fn n_nodes(&self) -> usize {
        self.n_steps + 1
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    /// Node `t_k`; computed as `k * t_end / n` (not repeated addition) so the
    /// same index always yields the same float.
    pub fn node(&self, k: usize) -> f64 {
        debug_assert!(k <= self.n_steps, "node index {k} out of range");
        k as f64 * self.t_end / self.n_steps as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|k| self.node(k)).collect()
    }
}
