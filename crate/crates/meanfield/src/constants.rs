use serde::{Deserialize, Serialize};
use statrs::function::beta::beta as beta_fn;
use statrs::function::gamma::gamma;

use crate::error::MeanFieldError;
use crate::exponents::ExponentSet;
use crate::model::ModelSpec;

/// The five coefficients of the noise-increment estimate
///   |int sigma(X^mu) - sigma(X^nu) dB^H|
///     <= ||B^H|| (L1 h^{b1} + L2 h^{a+b1}) ||X^mu - X^nu||_inf
///      + L3 ||B^H|| h^{b+b1} ||X^mu - X^nu||_b
///      + ||B^H|| (L4 h^{b1} + L5 h^{a+b1}) W(mu, nu).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lambdas {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    pub l5: f64,
}

impl Lambdas {
    pub const ZERO: Lambdas = Lambdas {
        l1: 0.0,
        l2: 0.0,
        l3: 0.0,
        l4: 0.0,
        l5: 0.0,
    };

    pub fn as_array(&self) -> [f64; 5] {
        [self.l1, self.l2, self.l3, self.l4, self.l5]
    }

    fn validate(&self) -> Result<(), MeanFieldError> {
        if self.as_array().iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(MeanFieldError::Domain(
                "lambda coefficients must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Exponent conditions needed by the Lambda formulas themselves (weaker than
/// the full fixed-point invariants: the estimate only needs
/// 0 < alpha < beta <= beta1 with alpha + beta1 > 1).
fn check_formula_domain(exps: &ExponentSet) -> Result<(), MeanFieldError> {
    let ExponentSet {
        alpha,
        beta,
        beta1,
        ..
    } = *exps;
    if !(alpha > 0.0 && alpha < 1.0 && alpha < beta && beta <= beta1 && beta1 < 1.0) {
        return Err(MeanFieldError::Exponents(format!(
            "need 0 < alpha < beta <= beta1 < 1, got alpha={alpha}, beta={beta}, beta1={beta1}"
        )));
    }
    if alpha + beta1 <= 1.0 {
        return Err(MeanFieldError::Exponents(format!(
            "need alpha + beta1 > 1, got {}",
            alpha + beta1
        )));
    }
    Ok(())
}

/// Evaluate the five closed-form noise-estimate coefficients for the model's
/// regularity bounds. `x_holder_mu`/`x_holder_nu` are (estimates of) the
/// beta-Holder seminorms of the two frozen solutions; `mu_norm`/`nu_norm` the
/// Holder-Wasserstein norms of the two frozen laws against the zero measure.
pub fn lambda_constants(
    model: &ModelSpec,
    exps: &ExponentSet,
    x_holder_mu: f64,
    x_holder_nu: f64,
    mu_norm: f64,
    nu_norm: f64,
) -> Result<Lambdas, MeanFieldError> {
    check_formula_domain(exps)?;
    for v in [x_holder_mu, x_holder_nu, mu_norm, nu_norm] {
        if !v.is_finite() || v < 0.0 {
            return Err(MeanFieldError::Domain(
                "holder seminorms and measure norms must be finite and nonnegative".into(),
            ));
        }
    }
    let ExponentSet {
        alpha: a,
        beta: b,
        beta1: b1,
        ..
    } = *exps;
    let c = &model.constants;
    let c0 = b1 / (gamma(a) * (a + b1 - 1.0));
    let g1a = gamma(1.0 - a);
    let pow = a / b;

    let l1 = c0 * beta_fn(1.0 - a, a + b1) / g1a * c.grad_sigma_sup;

    let pref = 2f64.powf(3.0 - pow) * b * c0 / ((b - a) * (a + b1) * g1a);
    let l2 = pref
        * c.grad_sigma_sup.powf((b - a) / b)
        * ((c.hess_sigma_sup * x_holder_mu.max(x_holder_nu)).powf(pow)
            + (c.lions_grad_sigma_sup * mu_norm.min(nu_norm)).powf(pow));

    let l3 = a * c0 * c.grad_sigma_sup * beta_fn(b - a + 1.0, a + b1) / ((b - a) * g1a);

    let l4 = c0 * c.lions_sigma_sup / g1a
        * (beta_fn(1.0 - a, a + b1) + a * beta_fn(b - a + 1.0, b1 + a) / (b - a));

    let l5 = pref
        * c.lions_sigma_sup.powf((b - a) / b)
        * ((c.grad1_lions_sigma_sup * x_holder_mu.min(x_holder_nu)).powf(pow)
            + ((c.lions2_sigma_sup + c.grad2_lions_sigma_sup) * mu_norm.max(nu_norm))
                .powf(pow));

    let out = Lambdas { l1, l2, l3, l4, l5 };
    out.validate()?;
    Ok(out)
}

/// Contraction window length: the smallest of the three brackets
///   ( cap / (3 (3 L1 v L3 v 3 L4) ||B||) )^{1/b1},
///   ( cap / (9 (L2 v L5) ||B||) )^{1/(a+b1)},
///   ( cap / (9 (1 v K_b)) )^{1/b1},
/// with cap = 1 ^ horizon^{b1}. A bracket whose Lambda group vanishes (or
/// when the noise seminorm is zero) is +infinity and drops out; the third
/// bracket keeps the result finite and below 1.
pub fn contraction_step(
    lambdas: &Lambdas,
    k_b: f64,
    bh_holder: f64,
    exps: &ExponentSet,
    horizon: f64,
) -> Result<f64, MeanFieldError> {
    check_formula_domain(exps)?;
    lambdas.validate()?;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(MeanFieldError::Domain("horizon must be positive".into()));
    }
    if !(k_b.is_finite() && k_b >= 0.0) || !(bh_holder.is_finite() && bh_holder >= 0.0) {
        return Err(MeanFieldError::Domain(
            "k_b and bh_holder must be finite and nonnegative".into(),
        ));
    }
    let b1 = exps.beta1;
    let cap = 1f64.min(horizon.powf(b1));

    let den1 = 3.0 * (3.0 * lambdas.l1).max(lambdas.l3).max(3.0 * lambdas.l4) * bh_holder;
    let t1 = if den1 > 0.0 {
        (cap / den1).powf(1.0 / b1)
    } else {
        f64::INFINITY
    };
    let den2 = 9.0 * lambdas.l2.max(lambdas.l5) * bh_holder;
    let t2 = if den2 > 0.0 {
        (cap / den2).powf(1.0 / (exps.alpha + b1))
    } else {
        f64::INFINITY
    };
    let t3 = (cap / (9.0 * 1f64.max(k_b))).powf(1.0 / b1);
    Ok(t1.min(t2).min(t3))
}

/// Step-count bound of the a-priori sup-norm estimate: the largest of
///   (1 v h) ||B||^{1/beta},
///   ((1 + K_sigma) ||B||)^{1/(gamma0+beta)} (h v h^{gamma0/(gamma0+beta)}),
///   (1 + K_b) (h v h^{1-beta}),
/// scaled by the generic constant `c` supplied by the caller.
pub fn moment_bound_g(
    horizon: f64,
    k_btilde: f64,
    k_sigmatilde: f64,
    bh_holder: f64,
    beta: f64,
    gamma0: f64,
    c: f64,
) -> Result<f64, MeanFieldError> {
    for v in [horizon, k_btilde, k_sigmatilde, bh_holder] {
        if !v.is_finite() || v < 0.0 {
            return Err(MeanFieldError::Domain(
                "moment bound inputs must be finite and nonnegative".into(),
            ));
        }
    }
    if !(beta > 0.0 && beta < 1.0) || !(gamma0 > 0.0) || !(c > 0.0) {
        return Err(MeanFieldError::Domain(
            "need beta in (0,1), gamma0 > 0 and c > 0".into(),
        ));
    }
    let h = horizon;
    let t1 = 1f64.max(h) * bh_holder.powf(1.0 / beta);
    let t2 = ((1.0 + k_sigmatilde) * bh_holder).powf(1.0 / (gamma0 + beta))
        * h.max(h.powf(gamma0 / (gamma0 + beta)));
    let t3 = (1.0 + k_btilde) * h.max(h.powf(1.0 - beta));
    Ok(c * t1.max(t2).max(t3))
}

/// Companion sup-norm estimate
///   ||X||_inf <= e^{2 c h + (1 ^ h^beta)} |X(S)|
///             + (1 ^ h^beta) e^{2 c h} (1 + G).
/// Soft diagnostic only: `c` stands in for a generic constant, so exceedances
/// flag the calibration rather than a solver bug.
pub fn sup_norm_bound(
    start_norm: f64,
    horizon: f64,
    c: f64,
    beta: f64,
    g: f64,
) -> Result<f64, MeanFieldError> {
    for v in [start_norm, horizon, g] {
        if !v.is_finite() || v < 0.0 {
            return Err(MeanFieldError::Domain(
                "sup-norm bound inputs must be finite and nonnegative".into(),
            ));
        }
    }
    if !(beta > 0.0 && beta < 1.0) || !(c > 0.0) {
        return Err(MeanFieldError::Domain(
            "need beta in (0,1) and c > 0".into(),
        ));
    }
    let capped = 1f64.min(horizon.powf(beta));
    let growth = (2.0 * c * horizon).exp();
    Ok((2.0 * c * horizon + capped).exp() * start_norm + capped * growth * (1.0 + g))
}
