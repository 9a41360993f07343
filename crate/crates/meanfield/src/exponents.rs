use serde::{Deserialize, Serialize};

use crate::error::MeanFieldError;

/// (sqrt(5) - 1) / 2: the smallest Hurst parameter for which the fixed-point
/// exponent system below is solvable.
pub const HURST_FLOOR: f64 = 0.618_033_988_749_894_9;

/// Grid pitch of the feasibility scan in `choose_exponents`.
const SCAN_STEP: f64 = 1e-3;

/// The exponent tuple driving the contraction estimates: a fractional
/// integration-by-parts order `alpha`, a Holder exponent `beta` for paths and
/// measure paths, and a noise Holder exponent `beta1` with
/// beta < beta1 < hurst.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentSet {
    pub hurst: f64,
    pub alpha: f64,
    pub beta: f64,
    pub beta1: f64,
}

impl ExponentSet {
    pub fn new(hurst: f64, alpha: f64, beta: f64, beta1: f64) -> Result<Self, MeanFieldError> {
        let s = Self {
            hurst,
            alpha,
            beta,
            beta1,
        };
        s.validate()?;
        Ok(s)
    }

    /// Slack in the quadratic exponent constraint
    /// alpha/(beta^2 (alpha+beta)) + 1/(alpha+beta) < 2; positive iff the
    /// constraint holds.
    pub fn quadratic_margin(&self) -> f64 {
        2.0 - self.alpha / (self.beta * self.beta * (self.alpha + self.beta))
            - 1.0 / (self.alpha + self.beta)
    }

    /// Speed ratio 2 alpha / ((2 (alpha + beta1) - 1) beta) compared against
    /// 2 (1 - H)/H + eps0' by the moderate-deviation exponent check.
    pub fn speed_ratio(&self) -> f64 {
        2.0 * self.alpha / ((2.0 * (self.alpha + self.beta1) - 1.0) * self.beta)
    }

    pub fn speed_margin_ok(&self, eps0_prime: f64) -> bool {
        self.speed_ratio() < 2.0 * (1.0 - self.hurst) / self.hurst + eps0_prime
    }

    pub fn validate(&self) -> Result<(), MeanFieldError> {
        let Self {
            hurst,
            alpha,
            beta,
            beta1,
        } = *self;
        if !(hurst.is_finite() && hurst < 1.0) || hurst <= HURST_FLOOR {
            return Err(MeanFieldError::UnsupportedHurst(hurst));
        }
        if !(beta > HURST_FLOOR && beta < beta1 && beta1 < hurst) {
            return Err(MeanFieldError::Exponents(format!(
                "need (sqrt(5)-1)/2 < beta < beta1 < hurst, got beta={beta}, beta1={beta1}, hurst={hurst}"
            )));
        }
        if !(alpha > 1.0 - beta && alpha < beta) {
            return Err(MeanFieldError::Exponents(format!(
                "need 1-beta < alpha < beta, got alpha={alpha}, beta={beta}"
            )));
        }
        if self.quadratic_margin() <= 0.0 {
            return Err(MeanFieldError::Exponents(format!(
                "quadratic exponent constraint violated: margin {}",
                self.quadratic_margin()
            )));
        }
        Ok(())
    }
}

/// Scan a 1e-3 grid of (alpha, beta) pairs and return the feasible pair with
/// the largest quadratic margin, with beta1 = (beta + hurst)/2. When
/// `eps0_prime` is supplied the scan additionally enforces the
/// moderate-deviation speed constraint, which shrinks the feasible set
/// towards beta ~ hurst, alpha ~ 1 - beta.
pub fn choose_exponents(
    hurst: f64,
    eps0_prime: Option<f64>,
) -> Result<ExponentSet, MeanFieldError> {
    if !hurst.is_finite() || hurst <= HURST_FLOOR {
        return Err(MeanFieldError::UnsupportedHurst(hurst));
    }
    if hurst >= 1.0 {
        return Err(MeanFieldError::Exponents(format!(
            "hurst must be < 1, got {hurst}"
        )));
    }
    let lo = HURST_FLOOR.max(0.5);
    let mut best: Option<ExponentSet> = None;
    let mut best_margin = f64::NEG_INFINITY;
    let mut kb = 1usize;
    loop {
        let beta = lo + kb as f64 * SCAN_STEP;
        if beta >= hurst {
            break;
        }
        let beta1 = 0.5 * (beta + hurst);
        let mut ka = 1usize;
        loop {
            let alpha = (1.0 - beta) + ka as f64 * SCAN_STEP;
            if alpha >= beta {
                break;
            }
            let cand = ExponentSet {
                hurst,
                alpha,
                beta,
                beta1,
            };
            let margin = cand.quadratic_margin();
            let feasible = margin > 0.0
                && match eps0_prime {
                    Some(eps) => cand.speed_margin_ok(eps),
                    None => true,
                };
            if feasible && margin > best_margin {
                best_margin = margin;
                best = Some(cand);
            }
            ka += 1;
        }
        kb += 1;
    }
    best.ok_or_else(|| {
        MeanFieldError::Exponents(format!(
            "no feasible (alpha, beta) pair on the {SCAN_STEP} grid for hurst {hurst}\
             {}",
            if eps0_prime.is_some() {
                " under the supplied speed margin"
            } else {
                ""
            }
        ))
    })
}
