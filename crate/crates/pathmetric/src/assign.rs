/// Dense shortest-augmenting-path assignment in O(n^3).
///
/// Returns the minimizing permutation together with the dual potentials it
/// maintains: u[i] + v[j] <= cost[i*n+j] everywhere, with equality on the
/// matched entries. The potentials identify the optimal face of the
/// transport polytope (complementary slackness), which the lexicographic
/// increment metric uses to restrict its second-stage program.
#[derive(Debug, Clone)]
pub(crate) struct Assignment {
    pub row_to_col: Vec<usize>,
    pub total: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

pub(crate) fn assignment(cost: &[f64], n: usize) -> Assignment {
    assert!(n >= 1 && cost.len() == n * n);
    // 1-based arrays; index 0 is the scratch column of the standard
    // shortest-path formulation
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1]; // p[j]: row matched to column j
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; n];
    let mut total = 0.0;
    for j in 1..=n {
        row_to_col[p[j] - 1] = j - 1;
        total += cost[(p[j] - 1) * n + (j - 1)];
    }
    Assignment {
        row_to_col,
        total,
        u: u[1..].to_vec(),
        v: v[1..].to_vec(),
    }
}
