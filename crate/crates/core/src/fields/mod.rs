//! Grids and sampled fields on the box `(a1,b1) x (a2,b2) x (a3,b3)`.
//!
//! Samples sit on uniformly spaced nodes that include both endpoints of every
//! axis. Storage is axis-1-fastest: the linear index of node `(i, j, k)` is
//! `i + n1 * (j + n2 * k)`.

pub(crate) mod interp;
pub mod io;
mod window;

pub use interp::{interp_trilinear, Interpolate, Stencil};
pub use window::{apply_boundary_window, apply_boundary_window_scalar, window_weights};

use crate::error::{Error, Result};

/// Minimum number of nodes per axis.
pub const MIN_DIM: usize = 4;

/// Uniform node lattice over a closed box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    bounds: [(f64, f64); 3],
    dims: [usize; 3],
    spacing: [f64; 3],
}

impl Grid {
    /// `make_grid`: spacing is `(high - low) / (n - 1)` per axis.
    pub fn new(bounds: [(f64, f64); 3], dims: [usize; 3]) -> Result<Self> {
        let mut spacing = [0.0; 3];
        for axis in 0..3 {
            let (lo, hi) = bounds[axis];
            if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
                return Err(Error::invalid(format!(
                    "axis {axis}: bounds ({lo}, {hi}) must be finite with low < high"
                )));
            }
            if dims[axis] < MIN_DIM {
                return Err(Error::invalid(format!(
                    "axis {axis}: dims {} < {MIN_DIM}",
                    dims[axis]
                )));
            }
            if dims[axis] > u32::MAX as usize {
                return Err(Error::invalid(format!("axis {axis}: dims too large")));
            }
            spacing[axis] = (hi - lo) / (dims[axis] - 1) as f64;
        }
        Ok(Grid { bounds, dims, spacing })
    }

    /// Cube `(lo, hi)^3` with `n` nodes per axis.
    pub fn cube(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Grid::new([(lo, hi); 3], [n; 3])
    }

    pub fn bounds(&self) -> [(f64, f64); 3] {
        self.bounds
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let rest = idx / self.dims[0];
        [i, rest % self.dims[1], rest / self.dims[1]]
    }

    #[inline]
    pub fn coord(&self, axis: usize, idx: usize) -> f64 {
        self.bounds[axis].0 + idx as f64 * self.spacing[axis]
    }

    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.unravel(idx);
        [self.coord(0, i), self.coord(1, j), self.coord(2, k)]
    }

    /// Lebesgue measure `|Omega|`.
    pub fn volume(&self) -> f64 {
        self.bounds.iter().map(|(lo, hi)| hi - lo).product()
    }

    /// Length of the box diagonal.
    pub fn diameter(&self) -> f64 {
        self.bounds
            .iter()
            .map(|(lo, hi)| (hi - lo) * (hi - lo))
            .sum::<f64>()
            .sqrt()
    }

    /// Closed-box membership.
    pub fn contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|a| p[a] >= self.bounds[a].0 && p[a] <= self.bounds[a].1)
    }

    /// Composite trapezoid weights along one axis.
    pub fn trapezoid_weights(&self, axis: usize) -> Vec<f64> {
        let n = self.dims[axis];
        let h = self.spacing[axis];
        let mut w = vec![h; n];
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
        w
    }

    /// Trapezoid quadrature of sampled values over the box, summed in storage
    /// order so the result is reproducible.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        let [w0, w1, w2] = [0, 1, 2].map(|a| self.trapezoid_weights(a));
        let [n0, n1, n2] = self.dims;
        let mut total = 0.0;
        for k in 0..n2 {
            let mut plane = 0.0;
            for j in 0..n1 {
                let row = &values[self.index(0, j, k)..self.index(0, j, k) + n0];
                let line: f64 = row.iter().zip(&w0).map(|(v, w)| v * w).sum();
                plane += w1[j] * line;
            }
            total += w2[k] * plane;
        }
        total
    }

    pub(crate) fn ensure_same(&self, other: &Grid, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{what}: {self:?} vs {other:?}")))
        }
    }
}

/// Real samples on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at index {pos}")));
        }
        Ok(ScalarField { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        ScalarField { values: vec![0.0; grid.len()], grid }
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|idx| f(grid.point(idx))).collect();
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &ScalarField) -> Result<Self> {
        self.grid.ensure_same(&other.grid, "axpy")?;
        Ok(ScalarField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
        })
    }

    /// Trapezoid quadrature of the field.
    pub fn integral(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    /// `L2(Omega)` norm by trapezoid quadrature.
    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        self.grid.integrate(&sq).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Three scalar components on one shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: [ScalarField; 3],
}

impl VectorField {
    pub fn new(components: [ScalarField; 3]) -> Result<Self> {
        let g = components[0].grid;
        components[1].grid.ensure_same(&g, "vector component 2")?;
        components[2].grid.ensure_same(&g, "vector component 3")?;
        Ok(VectorField { components })
    }

    pub fn zeros(grid: Grid) -> Self {
        VectorField {
            components: [0, 1, 2].map(|_| ScalarField::zeros(grid)),
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let samples: Vec<[f64; 3]> = (0..grid.len()).map(|idx| f(grid.point(idx))).collect();
        VectorField {
            components: [0, 1, 2].map(|c| {
                ScalarField::from_vec_unchecked(grid, samples.iter().map(|s| s[c]).collect())
            }),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.components[0].grid
    }

    pub fn components(&self) -> &[ScalarField; 3] {
        &self.components
    }

    pub fn component(&self, c: usize) -> &ScalarField {
        &self.components[c]
    }

    pub fn into_components(self) -> [ScalarField; 3] {
        self.components
    }

    pub fn scaled(&self, c: f64) -> Self {
        VectorField {
            components: [0, 1, 2].map(|i| self.components[i].scaled(c)),
        }
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [f64; 3] {
        [0, 1, 2].map(|c| self.components[c].values[idx])
    }

    /// Node-interleaved copy `[v1, v2, v3, v1, ...]` for cache-friendly sampling.
    pub fn interleaved(&self) -> Vec<f64> {
        let n = self.grid().len();
        let mut out = Vec::with_capacity(3 * n);
        for idx in 0..n {
            out.extend_from_slice(&self.at(idx));
        }
        out
    }

    pub fn l2_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.l2_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }
}

/// Scalar and vector fields viewed as a list of scalar components.
pub trait FieldComponents {
    fn scalar_components(&self) -> Vec<&ScalarField>;
}

impl FieldComponents for ScalarField {
    fn scalar_components(&self) -> Vec<&ScalarField> {
        vec![self]
    }
}

impl FieldComponents for VectorField {
    fn scalar_components(&self) -> Vec<&ScalarField> {
        self.components.iter().collect()
    }
}

/// Time-dependent velocity `v(x, t)` on `[0, tau]`, piecewise linear in time
/// between equispaced nodes, trilinear in space, and identically zero on the
/// outer `margin` voxel shells of every snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    grid: Grid,
    horizon: f64,
    snapshots: Vec<VectorField>,
    margin: usize,
}

impl VelocityField {
    pub fn new(grid: Grid, horizon: f64, snapshots: Vec<VectorField>, margin: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid(format!("horizon {horizon} must be positive")));
        }
        if snapshots.len() < 2 {
            return Err(Error::invalid("velocity needs at least two time nodes"));
        }
        check_margin(&grid, margin)?;
        for (n, snap) in snapshots.iter().enumerate() {
            snap.grid().ensure_same(&grid, &format!("velocity snapshot {n}"))?;
            if let Some(idx) = first_nonzero_in_shell(snap, margin) {
                return Err(Error::Precondition(format!(
                    "velocity snapshot {n} is nonzero at voxel {:?} inside the {margin}-voxel boundary shell",
                    grid.unravel(idx)
                )));
            }
        }
        Ok(VelocityField { grid, horizon, snapshots, margin })
    }

    /// Windows each snapshot before assembling the field.
    pub fn windowed(grid: Grid, horizon: f64, snapshots: Vec<VectorField>, margin: usize) -> Result<Self> {
        let snapshots = snapshots
            .iter()
            .map(|s| apply_boundary_window(s, margin))
            .collect::<Result<Vec<_>>>()?;
        VelocityField::new(grid, horizon, snapshots, margin)
    }

    pub fn zeros(grid: Grid, horizon: f64, time_nodes: usize, margin: usize) -> Result<Self> {
        VelocityField::new(grid, horizon, vec![VectorField::zeros(grid); time_nodes], margin)
    }

    /// Stationary field: the same snapshot at every node.
    pub fn stationary(snapshot: VectorField, horizon: f64, time_nodes: usize, margin: usize) -> Result<Self> {
        let grid = *snapshot.grid();
        VelocityField::new(grid, horizon, vec![snapshot; time_nodes], margin)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn time_nodes(&self) -> usize {
        self.snapshots.len()
    }

    pub fn time_step(&self) -> f64 {
        self.horizon / (self.snapshots.len() - 1) as f64
    }

    pub fn node_time(&self, n: usize) -> f64 {
        n as f64 * self.time_step()
    }

    pub fn snapshots(&self) -> &[VectorField] {
        &self.snapshots
    }

    /// Bracketing node and linear weight of time `s` (clamped to `[0, tau]`).
    pub fn time_bracket(&self, s: f64) -> (usize, f64) {
        let last = self.snapshots.len() - 1;
        let u = (s / self.time_step()).clamp(0.0, last as f64);
        let n = (u.floor() as usize).min(last - 1);
        (n, u - n as f64)
    }

    /// Interleaved snapshot at time `s` (see [`VectorField::interleaved`]).
    pub fn interleaved_at(&self, s: f64) -> Vec<f64> {
        let (n, theta) = self.time_bracket(s);
        let a = self.snapshots[n].interleaved();
        if theta == 0.0 {
            return a;
        }
        let b = self.snapshots[n + 1].interleaved();
        if theta == 1.0 {
            return b;
        }
        a.iter()
            .zip(&b)
            .map(|(x, y)| (1.0 - theta) * x + theta * y)
            .collect()
    }

    /// Trilinear-in-space, linear-in-time evaluation; zero outside the box.
    pub fn eval(&self, p: [f64; 3], s: f64) -> Result<[f64; 3]> {
        let (n, theta) = self.time_bracket(s);
        let a = self.snapshots[n].interp(p)?;
        if theta == 0.0 {
            return Ok(a);
        }
        let b = self.snapshots[n + 1].interp(p)?;
        Ok([0, 1, 2].map(|c| (1.0 - theta) * a[c] + theta * b[c]))
    }

    /// `-v(x, tau - t)`: its flow inverts the flow of `self`.
    pub fn time_reversed(&self) -> Self {
        VelocityField {
            grid: self.grid,
            horizon: self.horizon,
            snapshots: self.snapshots.iter().rev().map(|s| s.scaled(-1.0)).collect(),
            margin: self.margin,
        }
    }
}

pub(crate) fn check_margin(grid: &Grid, margin: usize) -> Result<()> {
    let min_dim = grid.dims().into_iter().min().unwrap_or(0);
    if margin < 1 || 2 * margin >= min_dim {
        return Err(Error::invalid(format!(
            "boundary margin {margin} must satisfy 1 <= margin and 2*margin < {min_dim}"
        )));
    }
    Ok(())
}

/// Index of the first node inside the outer `margin` shells that is not exactly zero.
fn first_nonzero_in_shell(field: &VectorField, margin: usize) -> Option<usize> {
    let grid = field.grid();
    let dims = grid.dims();
    (0..grid.len()).find(|&idx| {
        let ijk = grid.unravel(idx);
        let in_shell = (0..3).any(|a| ijk[a] < margin || ijk[a] + margin >= dims[a]);
        in_shell && field.at(idx).iter().any(|&v| v != 0.0)
    })
}
