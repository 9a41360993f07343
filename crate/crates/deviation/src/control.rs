use fraccalc::{h_inner, SteppedFunction};

use crate::error::DeviationError;

/// Step-function control together with its cached reproducing-kernel energy
/// `|h|^2 = <h, h>`. The energy is computed once at construction, so cost
/// queries in optimizer loops are free.
#[derive(Debug, Clone)]
pub struct Control {
    h: SteppedFunction,
    hurst: f64,
    norm_sq: f64,
}

impl Control {
    pub fn new(h: SteppedFunction, hurst: f64) -> Result<Self, DeviationError> {
        let norm_sq = h_inner(&h, &h, hurst)?;
        if !norm_sq.is_finite() {
            return Err(DeviationError::Domain(
                "control energy is not finite".into(),
            ));
        }
        // the kernel is positive semi-definite; anything below a rounding
        // margin is noise, anything further negative is a real defect
        if norm_sq < -1e-9 * (1.0 + h.l2_norm_sq()) {
            return Err(DeviationError::Domain(format!(
                "control energy is negative: {norm_sq:.3e}"
            )));
        }
        Ok(Self {
            h,
            hurst,
            norm_sq: norm_sq.max(0.0),
        })
    }

    pub fn zero(grid: fbm::TimeGrid, dim: usize, hurst: f64) -> Result<Self, DeviationError> {
        Self::new(SteppedFunction::zeros(grid, dim), hurst)
    }

    pub fn h(&self) -> &SteppedFunction {
        &self.h
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// Cameron-Martin energy `|h|^2 / 2` of this control.
    pub fn cost(&self) -> f64 {
        0.5 * self.norm_sq
    }

    /// Control scaled by `c`, with the energy recomputed from scratch rather
    /// than via the `c^2` identity, so the two routes stay independent.
    pub fn scaled(&self, c: f64) -> Result<Self, DeviationError> {
        if !c.is_finite() {
            return Err(DeviationError::Domain("scale must be finite".into()));
        }
        let grid = self.h.grid();
        let dim = self.h.dim();
        let levels: Vec<f64> = self.h.levels().iter().map(|v| c * v).collect();
        let h = SteppedFunction::new(grid, dim, levels)?;
        Self::new(h, self.hurst)
    }
}

/// Energy functional `h -> |h|^2 / 2` that prices a control in the large- and
/// moderate-deviation rate functions.
pub fn cameron_martin_cost(control: &Control) -> f64 {
    control.cost()
}
