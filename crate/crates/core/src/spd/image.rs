use rayon::prelude::*;

use super::{project_spd, reorient, rotation_from_jacobian, spd_floor, sym_eig, SymMat3};
use crate::error::{Error, Result};
use crate::fields::interp::corners;
use crate::fields::Grid;
use crate::flow::Deformation;

/// Grid of SPD tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorImage {
    grid: Grid,
    voxels: Vec<SymMat3>,
}

impl TensorImage {
    /// Validates that every voxel is finite and SPD.
    pub fn new(grid: Grid, voxels: Vec<SymMat3>) -> Result<Self> {
        if voxels.len() != grid.len() {
            return Err(Error::invalid(format!(
                "expected {} tensors, got {}",
                grid.len(),
                voxels.len()
            )));
        }
        for (voxel, m) in voxels.iter().enumerate() {
            let min = if m.is_finite() { sym_eig(m).values[2] } else { f64::NAN };
            if !(min > spd_floor(m)) {
                return Err(Error::NotSpd { voxel, min_eigenvalue: min });
            }
        }
        Ok(TensorImage { grid, voxels })
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> SymMat3) -> Result<Self> {
        TensorImage::new(grid, (0..grid.len()).map(|i| f(grid.point(i))).collect())
    }

    pub fn constant(grid: Grid, m: SymMat3) -> Result<Self> {
        TensorImage::new(grid, vec![m; grid.len()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn voxels(&self) -> &[SymMat3] {
        &self.voxels
    }

    /// Componentwise trilinear interpolation; zero outside the box.
    pub fn interp(&self, p: [f64; 3]) -> SymMat3 {
        match corners(&self.grid, p) {
            None => SymMat3::ZERO,
            Some((idx, w)) => {
                if let Some(c) = w.iter().position(|&x| x == 1.0) {
                    return self.voxels[idx[c]];
                }
                let mut acc = [0.0; 6];
                for c in 0..8 {
                    for (a, v) in acc.iter_mut().zip(&self.voxels[idx[c]].0) {
                        *a += w[c] * v;
                    }
                }
                SymMat3(acc)
            }
        }
    }

    /// Pointwise squared Frobenius distance to `other`.
    pub fn sq_distance(&self, other: &TensorImage) -> Result<Vec<f64>> {
        self.grid.ensure_same(&other.grid, "tensor images")?;
        Ok(self
            .voxels
            .iter()
            .zip(&other.voxels)
            .map(|(a, b)| (*a - *b).frobenius_sq())
            .collect())
    }

    /// `|| self - other ||^2_{L2(Omega)}` by trapezoid quadrature.
    pub fn l2_distance_sq(&self, other: &TensorImage) -> Result<f64> {
        Ok(self.grid.integrate(&self.sq_distance(other)?))
    }

    /// `max_x |self(x) - other(x)|^2`.
    pub fn max_sq_distance(&self, other: &TensorImage) -> Result<f64> {
        Ok(self.sq_distance(other)?.into_iter().fold(0.0, f64::max))
    }

    /// `|| self ||^2_{L2(Omega)}`.
    pub fn l2_norm_sq(&self) -> f64 {
        let sq: Vec<f64> = self.voxels.iter().map(|m| m.frobenius_sq()).collect();
        self.grid.integrate(&sq)
    }
}

/// Finite-strain warp: at each voxel `x`, `R T(h(x)) R^T` with `T(h(x))`
/// interpolated and projected onto SPD, and `R` the rotation factor of the
/// deformation's Jacobian at `x`.
pub fn warp_tensor_image(t: &TensorImage, deformation: &Deformation) -> Result<TensorImage> {
    let grid = *t.grid();
    deformation.grid().ensure_same(&grid, "warp")?;
    let voxels = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let sampled = project_spd(&t.interp(deformation.position(idx)));
            let r = rotation_from_jacobian(&deformation.jacobians()[idx])?;
            Ok(reorient(&sampled, &r))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TensorImage { grid, voxels })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_spd_voxels() {
        let g = Grid::cube(0.0, 1.0, 4).unwrap();
        let mut v = vec![SymMat3::IDENTITY; g.len()];
        v[7] = SymMat3::diag(1.0, -1.0, 1.0);
        assert!(matches!(TensorImage::new(g, v), Err(Error::NotSpd { voxel: 7, .. })));
    }

    #[test]
    fn identity_warp_is_exact() {
        let g = Grid::cube(0.0, 1.0, 5).unwrap();
        let t = TensorImage::from_fn(g, |p| SymMat3([1.0 + p[0], 0.1 * p[1], 0.0, 2.0, 0.3, 1.5 + p[2]]))
            .unwrap();
        let w = warp_tensor_image(&t, &Deformation::identity(g)).unwrap();
        assert_eq!(w, t);
    }
}
