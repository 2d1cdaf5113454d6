//! SPD(3) algebra and finite-strain reorientation of tensor images.

mod image;
mod mat;

pub use image::{warp_tensor_image, TensorImage};
pub use mat::{rotation_about, Mat3, SymMat3};

use crate::error::{Error, Result};

/// Relative eigenvalue floor: a matrix counts as SPD when its smallest
/// eigenvalue exceeds `EPS_SPD * trace / 3`.
pub const EPS_SPD: f64 = 1e-8;

/// `EPS_SPD * trace / 3`.
pub fn spd_floor(m: &SymMat3) -> f64 {
    EPS_SPD * m.trace() / 3.0
}

/// Eigenvalues in descending order and the matching orthonormal eigenvectors as columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEigen {
    pub values: [f64; 3],
    pub vectors: Mat3,
}

impl SymEigen {
    /// `Q f(Lambda) Q^T`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> SymMat3 {
        let q = &self.vectors;
        let d = self.values.map(f);
        let e = |i: usize, j: usize| (0..3).map(|k| q.get(i, k) * d[k] * q.get(j, k)).sum::<f64>();
        SymMat3([e(0, 0), e(0, 1), e(0, 2), e(1, 1), e(1, 2), e(2, 2)])
    }

    pub fn reconstruct(&self) -> SymMat3 {
        self.reconstruct_with(|x| x)
    }
}

/// Cyclic Jacobi eigendecomposition.
pub fn sym_eig(a: &SymMat3) -> SymEigen {
    let mut m = a.to_mat3().rows();
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let scale = a.frobenius_sq().sqrt();
    for _sweep in 0..64 {
        let off = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
        if off.sqrt() <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = m[p][q];
            if apq == 0.0 {
                continue;
            }
            let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for k in 0..3 {
                let mkp = m[k][p];
                let mkq = m[k][q];
                m[k][p] = c * mkp - s * mkq;
                m[k][q] = s * mkp + c * mkq;
            }
            for k in 0..3 {
                let mpk = m[p][k];
                let mqk = m[q][k];
                m[p][k] = c * mpk - s * mqk;
                m[q][k] = s * mpk + c * mqk;
            }
            for row in v.iter_mut() {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| m[j][j].total_cmp(&m[i][i]));
    let values = order.map(|i| m[i][i]);
    let vectors = Mat3::from_rows([0, 1, 2].map(|r| order.map(|c| v[r][c])));
    SymEigen { values, vectors }
}

/// `A^(-1/2)` for SPD `A`.
pub fn inv_sqrt_spd(a: &SymMat3) -> Result<SymMat3> {
    let e = sym_eig(a);
    let min = e.values[2];
    if !(min > spd_floor(a)) {
        return Err(Error::NearSingular { min_eigenvalue: min });
    }
    Ok(e.reconstruct_with(|x| 1.0 / x.sqrt()))
}

/// Rotation factor `R = J^T (J J^T)^(-1/2)` of a nonsingular Jacobian.
pub fn rotation_from_jacobian(j: &Mat3) -> Result<Mat3> {
    let b = inv_sqrt_spd(&j.gram())?;
    Ok(j.transpose() * b.to_mat3())
}

/// `R M R^T`; the identity returns `M` bit for bit (signed zeros included).
pub fn reorient(m: &SymMat3, r: &Mat3) -> SymMat3 {
    if *r == Mat3::IDENTITY {
        return *m;
    }
    SymMat3::from_mat3(&(*r * m.to_mat3() * r.transpose()))
}

/// Raises eigenvalues below the relative floor to the floor; SPD inputs are
/// returned unchanged.
pub fn project_spd(m: &SymMat3) -> SymMat3 {
    let e = sym_eig(m);
    let floor = EPS_SPD * (m.trace() / 3.0).abs().max(f64::MIN_POSITIVE);
    if e.values[2] >= floor {
        return *m;
    }
    e.reconstruct_with(|x| x.max(floor))
}

/// `det(B1 + B2)^(1/3) >= det(B1)^(1/3) + det(B2)^(1/3)` up to `1e-12`.
pub fn minkowski_det_holds(b1: &SymMat3, b2: &SymMat3) -> bool {
    let lhs = (*b1 + *b2).det().cbrt();
    let rhs = b1.det().cbrt() + b2.det().cbrt();
    lhs >= rhs - 1e-12
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_eigen() {
        let e = sym_eig(&SymMat3::diag(4.0, 9.0, 16.0));
        assert_eq!(e.values, [16.0, 9.0, 4.0]);
        let e = sym_eig(&SymMat3::IDENTITY);
        assert_eq!(e.values, [1.0, 1.0, 1.0]);
    }

    #[test]
    fn dense_eigen_reconstructs() {
        let a = SymMat3([2.0, -1.0, 0.3, 3.0, 0.7, -1.5]);
        let e = sym_eig(&a);
        let r = e.reconstruct();
        for i in 0..6 {
            assert!((r.0[i] - a.0[i]).abs() < 1e-13);
        }
        let q = e.vectors;
        assert!((q * q.transpose()).max_abs_diff(&Mat3::IDENTITY) < 1e-14);
        assert!(e.values[0] >= e.values[1] && e.values[1] >= e.values[2]);
    }

    #[test]
    fn inverse_square_roots() {
        let b = inv_sqrt_spd(&SymMat3::diag(4.0, 9.0, 16.0)).unwrap();
        let expect = SymMat3::diag(0.5, 1.0 / 3.0, 0.25);
        for i in 0..6 {
            assert!((b.0[i] - expect.0[i]).abs() < 1e-15);
        }
        assert!(matches!(
            inv_sqrt_spd(&SymMat3::diag(1.0, 1.0, 0.0)),
            Err(Error::NearSingular { .. })
        ));
    }

    #[test]
    fn rotation_factor_cases() {
        let r = rotation_from_jacobian(&Mat3::diag([2.0; 3])).unwrap();
        assert!(r.max_abs_diff(&Mat3::IDENTITY) < 1e-15);
        let q = rotation_about([0.3, -1.0, 0.2], 1.1);
        let r = rotation_from_jacobian(&q.transpose()).unwrap();
        assert!(r.max_abs_diff(&q) < 1e-14);
    }

    #[test]
    fn reorient_keeps_spectrum() {
        let m = SymMat3::diag(3.0, 2.0, 1.0);
        let q = rotation_about([0.0, 0.0, 1.0], std::f64::consts::FRAC_PI_2);
        let e = sym_eig(&reorient(&m, &q));
        for (a, b) in e.values.iter().zip([3.0, 2.0, 1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(reorient(&m, &Mat3::IDENTITY), m);
    }

    #[test]
    fn projection_is_noop_on_spd() {
        let m = SymMat3([2.0, 0.1, 0.0, 1.0, 0.2, 3.0]);
        assert_eq!(project_spd(&m), m);
        let bad = SymMat3::diag(1.0, 1.0, -0.5);
        let p = project_spd(&bad);
        assert!(sym_eig(&p).values[2] > 0.0);
    }

    #[test]
    fn minkowski_equality_cases() {
        assert!(minkowski_det_holds(&SymMat3::IDENTITY, &SymMat3::IDENTITY));
        assert!(minkowski_det_holds(&SymMat3::IDENTITY, &SymMat3::diag(8.0, 8.0, 8.0)));
    }
}
