use super::{Grid, ScalarField, VectorField};
use crate::error::{Error, Result};

/// Fractional offsets this close to a node are snapped onto it, so that
/// voxel centers reproduce stored values exactly despite round-off in `(x - a) / h`.
const SNAP: f64 = 1e-10;

/// Trilinear evaluation with zero extension outside the closed box.
pub trait Interpolate {
    type Output;

    fn interp(&self, p: [f64; 3]) -> Result<Self::Output>;
}

/// Free-function form of [`Interpolate::interp`].
pub fn interp_trilinear<F: Interpolate>(field: &F, p: [f64; 3]) -> Result<F::Output> {
    field.interp(p)
}

fn check_point(p: [f64; 3]) -> Result<()> {
    if p.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid(format!("non-finite interpolation point {p:?}")))
    }
}

/// Lower cell node and snapped fractional offset along one axis, or `None`
/// when the coordinate lies outside `[low, high]`.
#[inline]
fn locate(grid: &Grid, axis: usize, x: f64) -> Option<(usize, f64)> {
    let (lo, hi) = grid.bounds[axis];
    if !(x >= lo && x <= hi) {
        return None;
    }
    let n = grid.dims[axis];
    let u = ((x - lo) / grid.spacing[axis]).clamp(0.0, (n - 1) as f64);
    let i0 = (u.floor() as usize).min(n - 2);
    let mut t = u - i0 as f64;
    if t < SNAP {
        t = 0.0;
    } else if t > 1.0 - SNAP {
        t = 1.0;
    }
    Some((i0, t))
}

/// Eight corner indices and trilinear weights, or `None` outside the box.
#[inline]
pub(crate) fn corners(grid: &Grid, p: [f64; 3]) -> Option<([usize; 8], [f64; 8])> {
    let (i, tx) = locate(grid, 0, p[0])?;
    let (j, ty) = locate(grid, 1, p[1])?;
    let (k, tz) = locate(grid, 2, p[2])?;
    let mut idx = [0; 8];
    let mut w = [0.0; 8];
    for c in 0..8 {
        let (di, dj, dk) = (c & 1, (c >> 1) & 1, (c >> 2) & 1);
        idx[c] = grid.index(i + di, j + dj, k + dk);
        let wx = if di == 1 { tx } else { 1.0 - tx };
        let wy = if dj == 1 { ty } else { 1.0 - ty };
        let wz = if dk == 1 { tz } else { 1.0 - tz };
        w[c] = wx * wy * wz;
    }
    Some((idx, w))
}

impl Interpolate for ScalarField {
    type Output = f64;

    fn interp(&self, p: [f64; 3]) -> Result<f64> {
        check_point(p)?;
        Ok(match corners(&self.grid, p) {
            None => 0.0,
            Some((idx, w)) => {
                // Exact node hits return the stored sample untouched.
                if let Some(c) = w.iter().position(|&x| x == 1.0) {
                    return Ok(self.values[idx[c]]);
                }
                idx.iter().zip(&w).map(|(&i, &w)| w * self.values[i]).sum()
            }
        })
    }
}

impl Interpolate for VectorField {
    type Output = [f64; 3];

    fn interp(&self, p: [f64; 3]) -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        for (c, comp) in self.components().iter().enumerate() {
            out[c] = comp.interp(p)?;
        }
        Ok(out)
    }
}

/// Trilinear sampling of a node-interleaved three-component field
/// (see [`VectorField::interleaved`]), with the Jacobian taken by central
/// differences of the interpolant at offsets of half a spacing per axis.
#[derive(Clone, Copy)]
pub struct Stencil<'a> {
    grid: &'a Grid,
    data: &'a [f64],
}

/// Weights on the three nodes `base, base+1, base+2` of one axis for the
/// interpolant at `u - 1/2`, `u` and `u + 1/2` (index units).
struct AxisWeights {
    base: isize,
    minus: [f64; 3],
    center: [f64; 3],
    plus: [f64; 3],
}

impl<'a> Stencil<'a> {
    pub fn new(grid: &'a Grid, data: &'a [f64]) -> Result<Self> {
        if data.len() != 3 * grid.len() {
            return Err(Error::invalid(format!(
                "interleaved data has {} values, expected {}",
                data.len(),
                3 * grid.len()
            )));
        }
        Ok(Stencil { grid, data })
    }

    /// Velocity at `p`; zero outside the box.
    #[inline]
    pub fn value(&self, p: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        if let Some((idx, w)) = corners(self.grid, p) {
            for c in 0..8 {
                let base = 3 * idx[c];
                for (o, d) in out.iter_mut().zip(&self.data[base..base + 3]) {
                    *o += w[c] * d;
                }
            }
        }
        out
    }

    fn axis_weights(&self, axis: usize, x: f64) -> AxisWeights {
        let (lo, _) = self.grid.bounds[axis];
        let h = self.grid.spacing[axis];
        let u = (x - lo) / h;
        let base = (u - 0.5).floor() as isize;
        let mut aw = AxisWeights { base, minus: [0.0; 3], center: [0.0; 3], plus: [0.0; 3] };
        let fill = |shift: f64, slot: &mut [f64; 3]| {
            if let Some((i0, t)) = locate(self.grid, axis, x + shift * h) {
                let off = i0 as isize - base;
                for (d, w) in [(0, 1.0 - t), (1, t)] {
                    let s = off + d;
                    if (0..3).contains(&s) {
                        slot[s as usize] += w;
                    }
                }
            }
        };
        fill(-0.5, &mut aw.minus);
        fill(0.0, &mut aw.center);
        fill(0.5, &mut aw.plus);
        aw
    }

    /// Velocity and Jacobian `jac[i][j] = dv_i/dx_j` at `p`.
    pub fn value_and_jacobian(&self, p: [f64; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
        let w = [0, 1, 2].map(|a| self.axis_weights(a, p[a]));
        let dims = self.grid.dims;
        let h = self.grid.spacing;
        let mut val = [0.0; 3];
        // diff[j][i]: plus-minus difference along axis j for component i
        let mut diff = [[0.0; 3]; 3];
        for c in 0..3 {
            let k = w[2].base + c as isize;
            if k < 0 || k >= dims[2] as isize {
                continue;
            }
            for b in 0..3 {
                let j = w[1].base + b as isize;
                if j < 0 || j >= dims[1] as isize {
                    continue;
                }
                for a in 0..3 {
                    let i = w[0].base + a as isize;
                    if i < 0 || i >= dims[0] as isize {
                        continue;
                    }
                    let (cx, cy, cz) = (w[0].center[a], w[1].center[b], w[2].center[c]);
                    let dx = (w[0].plus[a] - w[0].minus[a]) * cy * cz;
                    let dy = cx * (w[1].plus[b] - w[1].minus[b]) * cz;
                    let dz = cx * cy * (w[2].plus[c] - w[2].minus[c]);
                    let vc = cx * cy * cz;
                    if vc == 0.0 && dx == 0.0 && dy == 0.0 && dz == 0.0 {
                        continue;
                    }
                    let node = 3 * self.grid.index(i as usize, j as usize, k as usize);
                    let f = &self.data[node..node + 3];
                    for comp in 0..3 {
                        val[comp] += vc * f[comp];
                        diff[0][comp] += dx * f[comp];
                        diff[1][comp] += dy * f[comp];
                        diff[2][comp] += dz * f[comp];
                    }
                }
            }
        }
        let mut jac = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                jac[i][j] = diff[j][i] / h[j];
            }
        }
        (val, jac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new([(0.0, 1.0), (-1.0, 2.0), (0.5, 1.5)], [7, 9, 6]).unwrap()
    }

    fn trilinear(p: [f64; 3]) -> f64 {
        1.0 + 2.0 * p[0] - p[1] + 0.5 * p[2] + p[0] * p[1] - 3.0 * p[1] * p[2] + p[0] * p[1] * p[2]
    }

    #[test]
    fn node_values_are_exact() {
        let g = grid();
        let f = ScalarField::from_fn(g, |p| (p[0] * 3.1).sin() + p[1] * p[2]);
        for idx in 0..g.len() {
            assert_eq!(f.interp(g.point(idx)).unwrap(), f.values()[idx]);
        }
    }

    #[test]
    fn reproduces_trilinear_functions() {
        let g = grid();
        let f = ScalarField::from_fn(g, trilinear);
        for p in [[0.13, -0.77, 0.61], [0.999, 1.99, 1.49], [0.5, 0.5, 1.0]] {
            assert!((f.interp(p).unwrap() - trilinear(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn outside_is_zero_and_nan_rejected() {
        let g = grid();
        let f = ScalarField::from_fn(g, |_| 2.0);
        assert_eq!(f.interp([1.0001, 0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(f.interp([0.5, 0.0, 1.0]).unwrap(), 2.0);
        assert!(f.interp([f64::NAN, 0.0, 1.0]).is_err());
    }

    #[test]
    fn stencil_matches_generic_interpolation() {
        let g = grid();
        let v = VectorField::from_fn(g, |p| [trilinear(p), p[0] * p[0], (p[1] + p[2]).cos()]);
        let data = v.interleaved();
        let s = Stencil::new(&g, &data).unwrap();
        for p in [[0.13, -0.77, 0.61], [0.0, 2.0, 1.5], [0.41, 0.3, 0.9]] {
            let a = v.interp(p).unwrap();
            let (b, _) = s.value_and_jacobian(p);
            let c = s.value(p);
            for i in 0..3 {
                assert!((a[i] - b[i]).abs() < 1e-13 && (a[i] - c[i]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn stencil_jacobian_is_exact_for_linear_fields() {
        let g = grid();
        let v = VectorField::from_fn(g, |p| {
            [p[0] - 2.0 * p[1], 3.0 * p[2], 0.5 * p[0] + p[1] + p[2]]
        });
        let data = v.interleaved();
        let s = Stencil::new(&g, &data).unwrap();
        let (_, jac) = s.value_and_jacobian([0.37, 0.21, 0.93]);
        let exact = [[1.0, -2.0, 0.0], [0.0, 0.0, 3.0], [0.5, 1.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((jac[i][j] - exact[i][j]).abs() < 1e-12, "{i}{j}");
            }
        }
    }
}
