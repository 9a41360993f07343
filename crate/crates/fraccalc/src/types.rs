use std::io::{BufRead, BufReader, Read, Write};

use fbm::{SamplePath, TimeGrid};

use crate::error::FracError;

/// d-dimensional step function: constant value on each grid cell
/// `[t_k, t_{k+1})`, `k = 0..n`.
///
/// These are the finite-resolution stand-ins for the elements of the
/// reproducing-kernel space; genuinely distributional elements are out of
/// scope and everything here is an honest function.
#[derive(Debug, Clone, PartialEq)]
pub struct SteppedFunction {
    grid: TimeGrid,
    dim: usize,
    levels: Vec<f64>, // row-major, n x dim
}

impl SteppedFunction {
    pub fn new(grid: TimeGrid, dim: usize, levels: Vec<f64>) -> Result<Self, FracError> {
        if dim == 0 {
            return Err(FracError::Domain("dim must be >= 1".into()));
        }
        if levels.len() != grid.n_steps() * dim {
            return Err(FracError::Domain(format!(
                "levels length {} != n*dim = {}",
                levels.len(),
                grid.n_steps() * dim
            )));
        }
        if levels.iter().any(|v| !v.is_finite()) {
            return Err(FracError::Domain("levels must be finite".into()));
        }
        Ok(Self { grid, dim, levels })
    }

    pub fn zeros(grid: TimeGrid, dim: usize) -> Self {
        Self {
            grid,
            dim,
            levels: vec![0.0; grid.n_steps() * dim],
        }
    }

    /// Step function from a closure of the cell left endpoint.
    pub fn from_fn(grid: TimeGrid, dim: usize, f: impl Fn(f64, usize) -> f64) -> Self {
        let mut levels = Vec::with_capacity(grid.n_steps() * dim);
        for c in 0..grid.n_steps() {
            let t = grid.node(c);
            for j in 0..dim {
                levels.push(f(t, j));
            }
        }
        Self { grid, dim, levels }
    }

    /// Indicator of `[0, t_k)` times the unit vector `e_coord`.
    pub fn indicator(grid: TimeGrid, upto_node: usize, coord: usize, dim: usize) -> Self {
        assert!(upto_node <= grid.n_steps());
        assert!(coord < dim);
        let mut s = Self::zeros(grid, dim);
        for c in 0..upto_node {
            s.levels[c * dim + coord] = 1.0;
        }
        s
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn level(&self, cell: usize, j: usize) -> f64 {
        self.levels[cell * self.dim + j]
    }

    pub fn level_mut(&mut self, cell: usize, j: usize) -> &mut f64 {
        &mut self.levels[cell * self.dim + j]
    }

    pub fn cell_values(&self, cell: usize) -> &[f64] {
        &self.levels[cell * self.dim..(cell + 1) * self.dim]
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Squared L2 norm: sum over cells of |level|^2 * dt.
    pub fn l2_norm_sq(&self) -> f64 {
        let dt = self.grid.dt();
        self.levels.iter().map(|v| v * v).sum::<f64>() * dt
    }
}

/// A sample path together with a declared Hölder exponent.
///
/// Operators treat the data as the piecewise-linear interpolant of the node
/// values; the exponent is metadata checked against operator preconditions,
/// not something estimated from the samples.
#[derive(Debug, Clone)]
pub struct HolderFunction {
    path: SamplePath,
    lambda: f64,
}

impl HolderFunction {
    pub fn new(path: SamplePath, lambda: f64) -> Result<Self, FracError> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(FracError::Domain(format!(
                "holder exponent must lie in (0,1], got {lambda}"
            )));
        }
        Ok(Self { path, lambda })
    }

    pub fn path(&self) -> &SamplePath {
        &self.path
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn grid(&self) -> TimeGrid {
        self.path.grid()
    }

    pub fn dim(&self) -> usize {
        self.path.dim()
    }

    #[inline]
    pub fn node_value(&self, k: usize, j: usize) -> f64 {
        self.path.value(k, j)
    }

    /// Slope of coordinate j on cell c.
    #[inline]
    pub fn slope(&self, c: usize, j: usize) -> f64 {
        (self.path.value(c + 1, j) - self.path.value(c, j)) / self.path.grid().dt()
    }

    /// Piecewise-linear interpolant at time t (clamped to [0, T]).
    pub fn eval(&self, t: f64, j: usize) -> f64 {
        let grid = self.path.grid();
        let n = grid.n_steps();
        let t = t.clamp(0.0, grid.t_end());
        let c = ((t / grid.dt()).floor() as usize).min(n - 1);
        self.path.value(c, j) + self.slope(c, j) * (t - grid.node(c))
    }
}

/// Step functions share the path CSV schema plus a `cell` column:
/// `func_id,cell,t,x0,...,x{d-1}` with `t` the cell left endpoint.
pub fn write_steps_csv<W: Write>(mut w: W, steps: &[SteppedFunction]) -> Result<(), FracError> {
    let first = steps
        .first()
        .ok_or_else(|| FracError::Domain("no step functions to write".into()))?;
    let grid = first.grid();
    let dim = first.dim();
    let mut header = String::from("func_id,cell,t");
    for j in 0..dim {
        header.push_str(&format!(",x{j}"));
    }
    header.push('\n');
    w.write_all(header.as_bytes())?;
    for (fid, s) in steps.iter().enumerate() {
        if s.grid() != grid || s.dim() != dim {
            return Err(FracError::GridMismatch(format!(
                "step function {fid} disagrees with function 0 on grid or dim"
            )));
        }
        for c in 0..grid.n_steps() {
            let mut line = format!("{fid},{c},{}", fbm::csvio::fmt17(grid.node(c)));
            for j in 0..dim {
                line.push(',');
                line.push_str(&fbm::csvio::fmt17(s.level(c, j)));
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
    }
    Ok(())
}

pub fn read_steps_csv<R: Read>(r: R) -> Result<Vec<SteppedFunction>, FracError> {
    let mut lines = BufReader::new(r).lines();
    let header = lines
        .next()
        .ok_or_else(|| FracError::CsvParse("empty input".into()))??;
    let cols: Vec<&str> = header.trim_end().split(',').collect();
    if cols.len() < 4 || cols[0] != "func_id" || cols[1] != "cell" || cols[2] != "t" {
        return Err(FracError::CsvParse(format!("unexpected header: {header}")));
    }
    let dim = cols.len() - 3;
    let mut per_func: Vec<Vec<(usize, f64, Vec<f64>)>> = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != dim + 3 {
            return Err(FracError::CsvParse(format!(
                "expected {} fields, got {}",
                dim + 3,
                fields.len()
            )));
        }
        let fid: usize = fields[0]
            .parse()
            .map_err(|e| FracError::CsvParse(format!("bad func_id: {e}")))?;
        let cell: usize = fields[1]
            .parse()
            .map_err(|e| FracError::CsvParse(format!("bad cell: {e}")))?;
        let t: f64 = fields[2]
            .parse()
            .map_err(|e| FracError::CsvParse(format!("bad t: {e}")))?;
        let mut vals = Vec::with_capacity(dim);
        for f in &fields[3..] {
            vals.push(
                f.parse::<f64>()
                    .map_err(|e| FracError::CsvParse(format!("bad value: {e}")))?,
            );
        }
        if fid == per_func.len() {
            per_func.push(Vec::new());
        } else if fid > per_func.len() {
            return Err(FracError::CsvParse(format!(
                "func ids must be contiguous, jumped to {fid}"
            )));
        }
        per_func[fid].push((cell, t, vals));
    }
    let first = per_func
        .first()
        .ok_or_else(|| FracError::CsvParse("no data rows".into()))?;
    let n = first.len();
    if n == 0 {
        return Err(FracError::CsvParse("no cells".into()));
    }
    // left endpoint of the last cell is (n-1)/n * t_end
    let t_last = first[n - 1].1;
    let t_end = if n == 1 {
        return Err(FracError::CsvParse(
            "cannot infer t_end from a single cell".into(),
        ));
    } else {
        t_last * n as f64 / (n as f64 - 1.0)
    };
    let grid = TimeGrid::new(t_end, n)?;
    let mut out = Vec::with_capacity(per_func.len());
    for (fid, rows) in per_func.iter().enumerate() {
        if rows.len() != n {
            return Err(FracError::CsvParse(format!(
                "function {fid} has {} cells, expected {n}",
                rows.len()
            )));
        }
        let mut levels = Vec::with_capacity(n * dim);
        for (k, (cell, _, vals)) in rows.iter().enumerate() {
            if *cell != k {
                return Err(FracError::CsvParse(format!(
                    "function {fid}: cell column out of order at {k}"
                )));
            }
            levels.extend_from_slice(vals);
        }
        out.push(SteppedFunction::new(grid, dim, levels)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolant_hits_nodes_and_midpoints() {
        let grid = TimeGrid::new(2.0, 4).unwrap();
        let p = SamplePath::scalar_from_fn(grid, |t| 3.0 * t - 1.0);
        let f = HolderFunction::new(p, 1.0).unwrap();
        assert!((f.eval(0.75, 0) - (3.0 * 0.75 - 1.0)).abs() < 1e-14);
        assert!((f.eval(2.0, 0) - 5.0).abs() < 1e-14);
        assert!((f.eval(0.0, 0) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn steps_csv_roundtrip() {
        let grid = TimeGrid::new(1.0, 4).unwrap();
        let a = SteppedFunction::from_fn(grid, 2, |t, j| t + j as f64);
        let b = SteppedFunction::indicator(grid, 3, 0, 2);
        let mut buf = Vec::new();
        write_steps_csv(&mut buf, &[a.clone(), b.clone()]).unwrap();
        let back = read_steps_csv(&buf[..]).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0], a);
        assert_eq!(back[1], b);
    }

    #[test]
    fn l2_norm_of_indicator() {
        let grid = TimeGrid::new(1.0, 8).unwrap();
        let s = SteppedFunction::indicator(grid, 4, 0, 1);
        assert!((s.l2_norm_sq() - 0.5).abs() < 1e-15);
    }
}
