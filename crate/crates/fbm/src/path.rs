use crate::error::FbmError;
use crate::grid::TimeGrid;

/// One d-dimensional trajectory sampled at the nodes of a [`TimeGrid`].
///
/// `values` is row-major: row k holds the d coordinates at node `t_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    grid: TimeGrid,
    dim: usize,
    values: Vec<f64>,
}

impl SamplePath {
    pub fn new(grid: TimeGrid, dim: usize, values: Vec<f64>) -> Result<Self, FbmError> {
        if dim == 0 {
            return Err(FbmError::Domain("dim must be >= 1".into()));
        }
        let expect = grid.n_nodes() * dim;
        if values.len() != expect {
            return Err(FbmError::Domain(format!(
                "values length {} != (n+1)*dim = {}",
                values.len(),
                expect
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(FbmError::NonFinite(format!(
                "path entry at flat index {bad} is {}",
                values[bad]
            )));
        }
        Ok(Self { grid, dim, values })
    }

    pub fn zeros(grid: TimeGrid, dim: usize) -> Self {
        Self {
            grid,
            dim,
            values: vec![0.0; grid.n_nodes() * dim],
        }
    }

    /// Build from a closure `f(t_k, coord)`.
    pub fn from_fn(grid: TimeGrid, dim: usize, f: impl Fn(f64, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.n_nodes() * dim);
        for k in 0..grid.n_nodes() {
            let t = grid.node(k);
            for j in 0..dim {
                values.push(f(t, j));
            }
        }
        Self { grid, dim, values }
    }

    /// Scalar path from `f(t_k)`.
    pub fn scalar_from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, 1, |t, _| f(t))
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn value(&self, k: usize, j: usize) -> f64 {
        self.values[k * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, k: usize, j: usize, v: f64) {
        self.values[k * self.dim + j] = v;
    }

    #[inline]
    pub fn node_values(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn node_values_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.grid.n_nodes()).map(|k| self.value(k, j)).collect()
    }

    /// Euclidean norm of the row at node k.
    pub fn node_norm(&self, k: usize) -> f64 {
        self.node_values(k)
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Sup over nodes `a..=b` of the Euclidean row norm.
    pub fn sup_norm(&self, a: usize, b: usize) -> f64 {
        (a..=b).map(|k| self.node_norm(k)).fold(0.0, f64::max)
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.values {
            *v *= c;
        }
    }
}
