use std::ops::{Add, Mul, Sub};

/// Symmetric 3x3 matrix stored as `(xx, xy, xz, yy, yz, zz)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat3(pub [f64; 6]);

/// General 3x3 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [f64; 9]);

impl SymMat3 {
    pub const IDENTITY: SymMat3 = SymMat3([1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
    pub const ZERO: SymMat3 = SymMat3([0.0; 6]);

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        SymMat3([a, 0.0, 0.0, b, 0.0, c])
    }

    /// Symmetric part of a general matrix.
    pub fn from_mat3(m: &Mat3) -> Self {
        let g = |i, j| 0.5 * (m.get(i, j) + m.get(j, i));
        SymMat3([m.get(0, 0), g(0, 1), g(0, 2), m.get(1, 1), g(1, 2), m.get(2, 2)])
    }

    pub fn to_mat3(&self) -> Mat3 {
        let [xx, xy, xz, yy, yz, zz] = self.0;
        Mat3([xx, xy, xz, xy, yy, yz, xz, yz, zz])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        const MAP: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];
        self.0[MAP[i][j]]
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[3] + self.0[5]
    }

    pub fn det(&self) -> f64 {
        self.to_mat3().det()
    }

    /// Squared Frobenius norm (off-diagonal entries counted twice).
    pub fn frobenius_sq(&self) -> f64 {
        let [xx, xy, xz, yy, yz, zz] = self.0;
        xx * xx + yy * yy + zz * zz + 2.0 * (xy * xy + xz * xz + yz * yz)
    }

    pub fn scale(&self, c: f64) -> Self {
        SymMat3(self.0.map(|v| c * v))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Add for SymMat3 {
    type Output = SymMat3;

    fn add(self, o: SymMat3) -> SymMat3 {
        SymMat3(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for SymMat3 {
    type Output = SymMat3;

    fn sub(self, o: SymMat3) -> SymMat3 {
        SymMat3(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);

    pub fn from_rows(r: [[f64; 3]; 3]) -> Self {
        Mat3([r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2]])
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        [0, 1, 2].map(|i| [0, 1, 2].map(|j| self.get(i, j)))
    }

    pub fn diag(d: [f64; 3]) -> Self {
        Mat3([d[0], 0.0, 0.0, 0.0, d[1], 0.0, 0.0, 0.0, d[2]])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[3 * i + j]
    }

    pub fn transpose(&self) -> Mat3 {
        Mat3(std::array::from_fn(|k| self.get(k % 3, k / 3)))
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
            + m[2] * (m[3] * m[7] - m[4] * m[6])
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[4] + self.0[8]
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `self * self^T`.
    pub fn gram(&self) -> SymMat3 {
        let r = |i: usize, j: usize| (0..3).map(|k| self.get(i, k) * self.get(j, k)).sum::<f64>();
        SymMat3([r(0, 0), r(0, 1), r(0, 2), r(1, 1), r(1, 2), r(2, 2)])
    }

    pub fn mul_vec(&self, v: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|i| (0..3).map(|k| self.get(i, k) * v[k]).sum())
    }

    /// `max |self_ij - other_ij|`.
    pub fn max_abs_diff(&self, other: &Mat3) -> f64 {
        self.0.iter().zip(&other.0).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn scale(&self, c: f64) -> Mat3 {
        Mat3(self.0.map(|v| c * v))
    }
}

impl Mul for Mat3 {
    type Output = Mat3;

    fn mul(self, o: Mat3) -> Mat3 {
        Mat3(std::array::from_fn(|k| {
            let (i, j) = (k / 3, k % 3);
            (0..3).map(|m| self.get(i, m) * o.get(m, j)).sum()
        }))
    }
}

impl Add for Mat3 {
    type Output = Mat3;

    fn add(self, o: Mat3) -> Mat3 {
        Mat3(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for Mat3 {
    type Output = Mat3;

    fn sub(self, o: Mat3) -> Mat3 {
        Mat3(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

/// Rotation by `angle` about unit `axis` (Rodrigues).
pub fn rotation_about(axis: [f64; 3], angle: f64) -> Mat3 {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let [x, y, z] = axis.map(|a| a / n);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    Mat3::from_rows([
        [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
        [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
        [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_and_transpose() {
        let a = Mat3::from_rows([[1.0, 2.0, 3.0], [0.0, 1.0, 4.0], [5.0, 6.0, 0.0]]);
        assert_eq!(a.det(), 1.0);
        assert_eq!(a.transpose().get(0, 2), 5.0);
        assert_eq!((a * Mat3::IDENTITY), a);
        let g = a.gram();
        assert_eq!(g.get(0, 2), 1.0 * 5.0 + 2.0 * 6.0);
    }

    #[test]
    fn rodrigues_is_orthogonal() {
        let r = rotation_about([1.0, 2.0, -0.5], 0.7);
        assert!((r * r.transpose()).max_abs_diff(&Mat3::IDENTITY) < 1e-15);
        assert!((r.det() - 1.0).abs() < 1e-15);
        let q = rotation_about([0.0, 0.0, 1.0], std::f64::consts::FRAC_PI_2);
        let v = q.mul_vec([1.0, 0.0, 0.0]);
        assert!((v[1] - 1.0).abs() < 1e-15 && v[0].abs() < 1e-15);
    }
}
