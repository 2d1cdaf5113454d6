//! Riemann–Liouville derivatives and integrals along grid axes, fractional
//! Sobolev seminorms, and the identities relating them.

pub mod line;
mod pairing;
mod spectral;

pub use pairing::{cross_pairing, fourier_symbol_check, PairingResult, SymbolCheck};
pub use spectral::{spectral_seminorm_axial, spectral_seminorm_h};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{FieldComponents, Grid, ScalarField, VectorField};

/// `Gamma(s)` for `s > 0`.
pub fn gamma(s: f64) -> Result<f64> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::invalid(format!("gamma argument {s} must be positive")));
    }
    Ok(statrs::function::gamma::gamma(s))
}

/// Positive differentiation order.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::invalid(format!("order {alpha} must be positive and finite")));
        }
        Ok(FracOrder(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Orders usable in the registration energy: `alpha > 2.5` and not a half-integer.
    pub fn check_admissible(self) -> Result<Self> {
        let a = self.0;
        let half = (a - 0.5).round() + 0.5;
        if a <= 2.5 || (a - half).abs() <= 1e-9 {
            return Err(Error::invalid(format!(
                "order {a} is not admissible for registration (need alpha > 2.5, alpha != m + 1/2)"
            )));
        }
        Ok(self)
    }

    pub fn is_admissible(self) -> bool {
        self.check_admissible().is_ok()
    }
}

impl TryFrom<f64> for FracOrder {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        FracOrder::new(v)
    }
}

impl From<FracOrder> for f64 {
    fn from(a: FracOrder) -> f64 {
        a.0
    }
}

impl fmt::Display for FracOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Left (`[a, x]`) or right (`[x, b]`) sided operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    Left,
    Right,
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            other => Err(Error::invalid(format!("side must be left or right, got {other:?}"))),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

fn check_axis(axis: usize) -> Result<()> {
    if axis < 3 {
        Ok(())
    } else {
        Err(Error::invalid(format!("axis index {axis} out of range 0..3")))
    }
}

/// Applies a line kernel to every grid line parallel to `axis`.
pub(crate) fn map_lines(
    field: &ScalarField,
    axis: usize,
    kernel: impl Fn(&[f64], f64) -> Vec<f64>,
) -> ScalarField {
    let grid = *field.grid();
    let dims = grid.dims();
    let h = grid.spacing()[axis];
    let (o1, o2) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let n = dims[axis];
    let src = field.values();
    let mut out = vec![0.0; grid.len()];
    let mut buf = vec![0.0; n];
    let mut ijk = [0usize; 3];
    for b in 0..dims[o2] {
        for a in 0..dims[o1] {
            ijk[o1] = a;
            ijk[o2] = b;
            for (t, slot) in buf.iter_mut().enumerate() {
                ijk[axis] = t;
                *slot = src[grid.index(ijk[0], ijk[1], ijk[2])];
            }
            let res = kernel(&buf, h);
            for (t, v) in res.into_iter().enumerate() {
                ijk[axis] = t;
                out[grid.index(ijk[0], ijk[1], ijk[2])] = v;
            }
        }
    }
    ScalarField::from_vec_unchecked(grid, out)
}

/// Partial fractional derivative of order `alpha` along `axis` (0-based),
/// by shifted Grünwald–Letnikov sums with zero extension.
pub fn frac_deriv(field: &ScalarField, axis: usize, alpha: FracOrder, side: Side) -> Result<ScalarField> {
    check_axis(axis)?;
    let a = alpha.value();
    Ok(match side {
        Side::Left => map_lines(field, axis, |f, h| line::left_derivative(f, h, a)),
        Side::Right => map_lines(field, axis, |f, h| line::right_derivative(f, h, a)),
    })
}

/// Fractional integral of order `alpha` along `axis` by product-trapezoid quadrature.
pub fn frac_integral(field: &ScalarField, axis: usize, alpha: FracOrder, side: Side) -> Result<ScalarField> {
    check_axis(axis)?;
    let a = alpha.value();
    Ok(match side {
        Side::Left => map_lines(field, axis, |f, h| line::left_integral(f, h, a)),
        Side::Right => map_lines(field, axis, |f, h| line::right_integral(f, h, a)),
    })
}

/// Fractional gradient: `entries[i][j]` is the order-alpha derivative of
/// component `i` along axis `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradAlphaField {
    entries: [[ScalarField; 3]; 3],
}

impl GradAlphaField {
    pub fn entries(&self) -> &[[ScalarField; 3]; 3] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> &ScalarField {
        &self.entries[i][j]
    }

    pub fn grid(&self) -> &Grid {
        self.entries[0][0].grid()
    }

    /// Pointwise squared Frobenius norm.
    pub fn frobenius_sq(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.grid().len()];
        for row in &self.entries {
            for e in row {
                for (a, v) in acc.iter_mut().zip(e.values()) {
                    *a += v * v;
                }
            }
        }
        acc
    }

    /// `int_Omega |grad^alpha u|^2`.
    pub fn norm_sq(&self) -> f64 {
        self.grid().integrate(&self.frobenius_sq())
    }
}

pub fn grad_alpha(u: &VectorField, alpha: FracOrder, side: Side) -> Result<GradAlphaField> {
    let row = |i: usize| -> Result<[ScalarField; 3]> {
        Ok([
            frac_deriv(u.component(i), 0, alpha, side)?,
            frac_deriv(u.component(i), 1, alpha, side)?,
            frac_deriv(u.component(i), 2, alpha, side)?,
        ])
    };
    Ok(GradAlphaField { entries: [row(0)?, row(1)?, row(2)?] })
}

fn seminorm(g: &impl FieldComponents, alpha: FracOrder, side: Side) -> Result<f64> {
    let mut total = 0.0;
    for comp in g.scalar_components() {
        for axis in 0..3 {
            let d = frac_deriv(comp, axis, alpha, side)?;
            let sq: Vec<f64> = d.values().iter().map(|v| v * v).collect();
            total += comp.grid().integrate(&sq);
        }
    }
    Ok(total.sqrt())
}

/// Left seminorm `(int_Omega |grad^alpha g|^2)^(1/2)`.
pub fn seminorm_fl(g: &impl FieldComponents, alpha: FracOrder) -> Result<f64> {
    seminorm(g, alpha, Side::Left)
}

/// Right seminorm, built from right-sided derivatives.
pub fn seminorm_fr(g: &impl FieldComponents, alpha: FracOrder) -> Result<f64> {
    seminorm(g, alpha, Side::Right)
}

/// Operator-norm bound of the fractional integrals on `L2(Omega)`:
/// `max_i (|a_i|^alpha + |b_i|^alpha) / Gamma(alpha + 1)`.
pub fn integral_bound_constant(grid: &Grid, alpha: FracOrder) -> Result<f64> {
    let a = alpha.value();
    let g = gamma(a + 1.0)?;
    Ok(grid
        .bounds()
        .iter()
        .map(|(lo, hi)| (lo.abs().powf(a) + hi.abs().powf(a)) / g)
        .fold(0.0, f64::max))
}

/// Poincaré constant `C / sqrt(3)` with `C` from [`integral_bound_constant`].
pub fn poincare_constant(grid: &Grid, alpha: FracOrder) -> Result<f64> {
    Ok(integral_bound_constant(grid, alpha)? / 3f64.sqrt())
}

/// `(|xi|^(2 alpha), sum_i |xi_i|^(2 alpha))` for the frequency bracket check.
pub fn frequency_powers(xi: [f64; 3], alpha: f64) -> (f64, f64) {
    let radial = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).powf(alpha);
    let axial = xi.iter().map(|x| x.abs().powf(2.0 * alpha)).sum();
    (radial, axial)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_values() {
        assert!((gamma(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((gamma(0.5).unwrap() - std::f64::consts::PI.sqrt()).abs() < 1e-13);
        assert!((gamma(4.0).unwrap() - 6.0).abs() < 1e-12);
        assert!(gamma(0.0).is_err() && gamma(-1.5).is_err());
    }

    #[test]
    fn admissibility() {
        assert!(FracOrder::new(2.6).unwrap().is_admissible());
        assert!(!FracOrder::new(3.5).unwrap().is_admissible());
        assert!(!FracOrder::new(2.4).unwrap().is_admissible());
        assert!(FracOrder::new(3.5 + 1e-6).unwrap().is_admissible());
        assert!(FracOrder::new(0.0).is_err());
    }

    #[test]
    fn derivative_along_each_axis_matches_line_kernel() {
        let g = Grid::new([(0.0, 1.0), (0.0, 2.0), (-1.0, 1.0)], [6, 7, 8]).unwrap();
        let f = ScalarField::from_fn(g, |p| p[0] * p[0] + p[1] * p[2] + (3.0 * p[2]).sin());
        let a = FracOrder::new(1.3).unwrap();
        let d = frac_deriv(&f, 1, a, Side::Right).unwrap();
        let (i, k) = (3, 5);
        let line: Vec<f64> = (0..7).map(|j| f.values()[g.index(i, j, k)]).collect();
        let expect = line::right_derivative(&line, g.spacing()[1], 1.3);
        for j in 0..7 {
            assert_eq!(d.values()[g.index(i, j, k)], expect[j]);
        }
    }

    #[test]
    fn grad_alpha_rows_follow_components() {
        let g = Grid::cube(0.0, 1.0, 6).unwrap();
        let u = VectorField::from_fn(g, |p| [p[0] * p[1], 0.0, 0.0]);
        let ga = grad_alpha(&u, FracOrder::new(0.7).unwrap(), Side::Left).unwrap();
        for i in 1..3 {
            for j in 0..3 {
                assert!(ga.entry(i, j).values().iter().all(|&v| v == 0.0));
            }
        }
        assert!(ga.entry(0, 0).max_abs() > 0.0);
    }
}
