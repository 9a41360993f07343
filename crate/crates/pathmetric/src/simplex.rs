use crate::error::MetricError;

const PIVOT_TOL: f64 = 1e-11;
const RED_TOL: f64 = 1e-10;
const MAX_ITERS: usize = 20_000;

/// Equal-weight transport program over an explicit set of admissible plan
/// entries, with an optional budget row:
///
///   min  cost . pi
///   s.t. sum_j pi(i,j) = 1/n          for every row i
///        sum_i pi(i,j) = 1/n          for j = 0..n-1 (last one redundant)
///        budget_cost . pi + s = rhs,  s >= 0   (optional)
///        pi >= 0 supported on `vars`
///
/// The budget row is how the lexicographic second stage pins the plan to the
/// (tolerance-widened) optimal face of the first stage.
pub(crate) struct TransportLp<'a> {
    pub n: usize,
    pub vars: &'a [(usize, usize)],
    pub cost: &'a [f64],
    pub budget: Option<(&'a [f64], f64)>,
}

pub(crate) struct LpOutcome {
    pub objective: f64,
    /// primal value per admissible entry, aligned with `vars`
    pub primal: Vec<f64>,
}

/// Dense two-phase primal simplex on the full tableau. Pricing is Dantzig
/// with a permanent switch to Bland's rule after a long degenerate streak,
/// so the method is fast on typical instances and still guaranteed finite.
pub(crate) fn solve_transport_lp(lp: &TransportLp) -> Result<LpOutcome, MetricError> {
    let n = lp.n;
    assert!(n >= 1 && lp.cost.len() == lp.vars.len());
    let nv = lp.vars.len();
    let nb = usize::from(lp.budget.is_some());
    let n_tr = 2 * n - 1;
    let m = n_tr + nb;
    let ncols = nv + nb + n_tr;
    let mut tab = Tableau::new(m, ncols);

    for (k, &(i, j)) in lp.vars.iter().enumerate() {
        *tab.at(i, k) = 1.0;
        if j + 1 < n {
            *tab.at(n + j, k) = 1.0;
        }
    }
    let target = 1.0 / n as f64;
    for r in 0..n_tr {
        *tab.at(r, tab.bcol) = target;
        *tab.at(r, nv + nb + r) = 1.0;
        tab.basis[r] = nv + nb + r;
    }
    if let Some((bcost, rhs)) = lp.budget {
        assert!(bcost.len() == nv);
        if rhs < 0.0 {
            return Err(MetricError::Lp(format!("negative budget rhs {rhs}")));
        }
        for (k, &c) in bcost.iter().enumerate() {
            *tab.at(m - 1, k) = c;
        }
        *tab.at(m - 1, nv) = 1.0; // slack
        *tab.at(m - 1, tab.bcol) = rhs;
        tab.basis[m - 1] = nv;
    }
    for &b in &tab.basis {
        tab.in_basis[b] = true;
    }

    // phase 1: drive the artificials out
    let mut phase_cost = vec![0.0; ncols];
    for c in &mut phase_cost[nv + nb..] {
        *c = 1.0;
    }
    tab.reset_objective(&phase_cost);
    tab.run()?;
    let infeasibility = tab.objective();
    if infeasibility > 1e-7 {
        return Err(MetricError::Lp(format!(
            "transport constraints not met (residual {infeasibility:.3e})"
        )));
    }
    // kick out any artificial still basic at zero so phase 2 cannot grow it
    for r in 0..m {
        if tab.basis[r] >= nv + nb {
            if let Some(q) = (0..nv + nb)
                .find(|&q| !tab.in_basis[q] && tab.at(r, q).abs() > PIVOT_TOL)
            {
                tab.pivot(r, q);
            }
        }
    }

    // phase 2: real objective, artificials locked out
    for j in nv + nb..ncols {
        tab.allowed[j] = false;
    }
    let mut cost = vec![0.0; ncols];
    cost[..nv].copy_from_slice(lp.cost);
    tab.reset_objective(&cost);
    tab.run()?;

    let mut primal = vec![0.0; nv];
    for r in 0..m {
        if tab.basis[r] < nv {
            primal[tab.basis[r]] = tab.at(r, tab.bcol).max(0.0);
        }
    }
    Ok(LpOutcome {
        objective: tab.objective(),
        primal,
    })
}

struct Tableau {
    m: usize,
    width: usize, // ncols + 1, trailing column is the rhs
    bcol: usize,
    t: Vec<f64>, // (m + 1) rows, last row is the objective
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    allowed: Vec<bool>,
}

impl Tableau {
    fn new(m: usize, ncols: usize) -> Self {
        Self {
            m,
            width: ncols + 1,
            bcol: ncols,
            t: vec![0.0; (m + 1) * (ncols + 1)],
            basis: vec![0; m],
            in_basis: vec![false; ncols],
            allowed: vec![true; ncols],
        }
    }

    #[inline]
    fn at(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.t[r * self.width + c]
    }

    #[inline]
    fn get(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width + c]
    }

    fn objective(&self) -> f64 {
        -self.get(self.m, self.bcol)
    }

    /// Rebuild the reduced-cost row for a new cost vector over the current
    /// basis: z_j = c_j - c_B . (B^-1 A)_j.
    fn reset_objective(&mut self, cost: &[f64]) {
        let m = self.m;
        for c in 0..self.width {
            *self.at(m, c) = if c < self.bcol { cost[c] } else { 0.0 };
        }
        for r in 0..m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for c in 0..self.width {
                    self.t[m * self.width + c] -= cb * self.t[r * self.width + c];
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let piv = self.get(r, q);
        let inv = 1.0 / piv;
        for c in 0..w {
            self.t[r * w + c] *= inv;
        }
        self.t[r * w + q] = 1.0;
        for rr in 0..=self.m {
            if rr == r {
                continue;
            }
            let f = self.t[rr * w + q];
            if f != 0.0 {
                for c in 0..w {
                    self.t[rr * w + c] -= f * self.t[r * w + c];
                }
                self.t[rr * w + q] = 0.0;
            }
        }
        self.in_basis[self.basis[r]] = false;
        self.basis[r] = q;
        self.in_basis[q] = true;
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let zrow = &self.t[self.m * self.width..];
        if bland {
            (0..self.bcol).find(|&j| self.allowed[j] && !self.in_basis[j] && zrow[j] < -RED_TOL)
        } else {
            let mut best = None;
            let mut best_val = -RED_TOL;
            for j in 0..self.bcol {
                if self.allowed[j] && !self.in_basis[j] && zrow[j] < best_val {
                    best_val = zrow[j];
                    best = Some(j);
                }
            }
            best
        }
    }

    fn leaving(&self, q: usize) -> Option<usize> {
        let mut theta_best = f64::INFINITY;
        let mut r_best: Option<usize> = None;
        for r in 0..self.m {
            let a = self.get(r, q);
            if a > PIVOT_TOL {
                let theta = self.get(r, self.bcol).max(0.0) / a;
                let better = match r_best {
                    None => true,
                    // Bland tie-break on the basic index keeps cycling out
                    Some(rb) => {
                        if theta < theta_best - 1e-12 {
                            true
                        } else if theta <= theta_best + 1e-12 {
                            self.basis[r] < self.basis[rb]
                        } else {
                            false
                        }
                    }
                };
                if better {
                    theta_best = theta.min(theta_best);
                    r_best = Some(r);
                }
            }
        }
        r_best
    }

    fn run(&mut self) -> Result<(), MetricError> {
        let mut bland = false;
        let mut degenerate_streak = 0usize;
        for _ in 0..MAX_ITERS {
            let Some(q) = self.entering(bland) else {
                return Ok(());
            };
            let Some(r) = self.leaving(q) else {
                return Err(MetricError::Lp(
                    "unbounded ray in a bounded transport polytope".into(),
                ));
            };
            let theta = self.get(r, self.bcol).max(0.0) / self.get(r, q);
            if theta <= 1e-12 {
                degenerate_streak += 1;
                if degenerate_streak > 3 * self.m + 10 {
                    bland = true;
                }
            } else {
                degenerate_streak = 0;
            }
            self.pivot(r, q);
        }
        Err(MetricError::Lp("iteration limit reached".into()))
    }
}
