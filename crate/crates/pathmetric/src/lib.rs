//! Metric structure on empirical path laws: sup-Wasserstein distance,
//! two-time marginal distances under the max cost, the lexicographic
//! increment metric, and the Hölder-Wasserstein combination of the two.

mod assign;
mod error;
mod measure;
mod simplex;
mod wasserstein;

pub use error::MetricError;
pub use measure::{
    mean_sq_increment, measure_holder_norm, EmpiricalMeasurePath, MetricReport, PairMetric,
    TransportPlan,
};
pub use wasserstein::{
    holder_wasserstein, pair_marginal_w2, path_wasserstein_sup, wasserstein2, wc_increment,
    wc_increment_reference, OptimalFace, DEFAULT_LEX_TOL,
};
