use crate::error::FbmError;
use crate::path::SamplePath;

/// Max index span before pair enumeration switches to a strided subset.
const PAIR_CAP: usize = 2048;

/// Grid Hölder seminorm over node pairs `a <= i < j <= b`:
/// `max |x(t_j) - x(t_i)| / (t_j - t_i)^beta` (Euclidean norm over
/// coordinates).
///
/// This is a grid-restricted proxy for the continuum seminorm. Spans wider
/// than 2048 indices are thinned to a strided subset (endpoints kept), which
/// can only under-estimate; exact O(n^2) enumeration otherwise.
pub fn holder_seminorm(
    path: &SamplePath,
    a: usize,
    b: usize,
    beta: f64,
) -> Result<f64, FbmError> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(FbmError::Domain(format!(
            "beta must lie in (0,1], got {beta}"
        )));
    }
    if a >= b {
        return Err(FbmError::EmptyRange { a, b });
    }
    let n = path.grid().n_steps();
    if b > n {
        return Err(FbmError::Domain(format!("index b={b} exceeds n={n}")));
    }

    let idx = thinned_indices(a, b);
    let grid = path.grid();
    let dim = path.dim();
    let mut best = 0.0f64;
    for (pos, &i) in idx.iter().enumerate() {
        let vi = path.node_values(i);
        let ti = grid.node(i);
        for &j in &idx[pos + 1..] {
            let vj = path.node_values(j);
            let mut d2 = 0.0;
            for c in 0..dim {
                let dv = vj[c] - vi[c];
                d2 += dv * dv;
            }
            let r = d2.sqrt() / (grid.node(j) - ti).powf(beta);
            if r > best {
                best = r;
            }
        }
    }
    Ok(best)
}

fn thinned_indices(a: usize, b: usize) -> Vec<usize> {
    let span = b - a;
    if span <= PAIR_CAP {
        return (a..=b).collect();
    }
    let stride = span.div_ceil(PAIR_CAP);
    let mut idx: Vec<usize> = (a..=b).step_by(stride).collect();
    if *idx.last().unwrap() != b {
        idx.push(b);
    }
    idx
}

/// Subdivision inequality for the grid Hölder seminorm: with pieces cut at
/// `partition` (node indices covering 0..=n),
/// `lhs = ||path||_{0,T,beta}` and
/// `rhs = n_pieces^{1-beta} * max_k ||path||_{piece_k,beta}`;
/// the contract is `lhs <= rhs + 1e-12`.
pub fn holder_subdivision_check(
    path: &SamplePath,
    beta: f64,
    partition: &[usize],
) -> Result<(f64, f64), FbmError> {
    let n = path.grid().n_steps();
    if partition.len() < 2 {
        return Err(FbmError::InvalidPartition(
            "need at least two partition indices".into(),
        ));
    }
    if partition[0] != 0 || *partition.last().unwrap() != n {
        return Err(FbmError::InvalidPartition(format!(
            "partition must start at 0 and end at n={n}"
        )));
    }
    if partition.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FbmError::InvalidPartition(
            "partition indices must be strictly increasing".into(),
        ));
    }

    let lhs = holder_seminorm(path, 0, n, beta)?;
    let mut max_piece = 0.0f64;
    for w in partition.windows(2) {
        max_piece = max_piece.max(holder_seminorm(path, w[0], w[1], beta)?);
    }
    let n_pieces = (partition.len() - 1) as f64;
    Ok((lhs, n_pieces.powf(1.0 - beta) * max_piece))
}
