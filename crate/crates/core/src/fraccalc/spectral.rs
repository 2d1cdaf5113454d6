use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::FracOrder;
use crate::error::{Error, Result};
use crate::fields::{FieldComponents, ScalarField};

#[derive(Clone, Copy)]
enum Weight {
    /// `|xi|^(2 alpha)`
    Radial,
    /// `sum_j |xi_j|^(2 alpha)`
    Axial,
}

/// The zero extension is only faithful if the field already vanishes on the boundary.
fn check_vanishes_on_boundary(f: &ScalarField) -> Result<()> {
    let grid = f.grid();
    let dims = grid.dims();
    let max = f.max_abs();
    let mut worst = 0.0f64;
    for idx in 0..grid.len() {
        let ijk = grid.unravel(idx);
        if (0..3).any(|a| ijk[a] == 0 || ijk[a] == dims[a] - 1) {
            worst = worst.max(f.values()[idx].abs());
        }
    }
    if worst > 1e-12 * max {
        return Err(Error::Precondition(format!(
            "field is not windowed: boundary value {worst:e} vs max {max:e}"
        )));
    }
    Ok(())
}

/// Squared magnitudes of the continuum Fourier transform of the zero-extended
/// field, sampled on the padded frequency lattice, with the lattice itself.
fn power_spectrum(f: &ScalarField, pad: usize) -> (Vec<f64>, [Vec<f64>; 3], f64) {
    let grid = f.grid();
    let dims = grid.dims();
    let h = grid.spacing();
    let big = dims.map(|n| n * pad);
    let total = big[0] * big[1] * big[2];
    let at = |i: usize, j: usize, k: usize| i + big[0] * (j + big[1] * k);

    let mut buf = vec![Complex::new(0.0, 0.0); total];
    for idx in 0..grid.len() {
        let [i, j, k] = grid.unravel(idx);
        buf[at(i, j, k)] = Complex::new(f.values()[idx], 0.0);
    }

    let mut planner = FftPlanner::<f64>::new();
    // Axis 0: contiguous lines; only the first n1 x n2 block is nonzero.
    let fft0 = planner.plan_fft_forward(big[0]);
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            let s = at(0, j, k);
            fft0.process(&mut buf[s..s + big[0]]);
        }
    }
    let mut line = Vec::new();
    for (axis, nonzero_k) in [(1usize, dims[2]), (2, big[2])] {
        let fft = planner.plan_fft_forward(big[axis]);
        line.resize(big[axis], Complex::new(0.0, 0.0));
        let outer = if axis == 1 { nonzero_k } else { big[1] };
        for o in 0..outer {
            for i in 0..big[0] {
                for t in 0..big[axis] {
                    line[t] = if axis == 1 { buf[at(i, t, o)] } else { buf[at(i, o, t)] };
                }
                fft.process(&mut line);
                for t in 0..big[axis] {
                    let dst = if axis == 1 { at(i, t, o) } else { at(i, o, t) };
                    buf[dst] = line[t];
                }
            }
        }
    }

    // hat f(xi) = (2 pi)^(-3/2) h1 h2 h3 DFT, phase dropped
    let scale = (2.0 * PI).powf(-1.5) * h[0] * h[1] * h[2];
    let power = buf.iter().map(|c| (scale * c.norm()).powi(2)).collect();
    let freqs = [0, 1, 2].map(|a| {
        let n = big[a];
        (0..n)
            .map(|m| {
                let signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
                2.0 * PI * signed / (n as f64 * h[a])
            })
            .collect::<Vec<f64>>()
    });
    let dxi: f64 = (0..3).map(|a| 2.0 * PI / (big[a] as f64 * h[a])).product();
    (power, freqs, dxi)
}

fn spectral(g: &impl FieldComponents, alpha: f64, pad: usize, weight: Weight) -> Result<f64> {
    if pad < 2 {
        return Err(Error::invalid(format!("pad factor {pad} must be at least 2")));
    }
    let mut total = 0.0;
    for f in g.scalar_components() {
        check_vanishes_on_boundary(f)?;
        let (power, xi, dxi) = power_spectrum(f, pad);
        let big = [xi[0].len(), xi[1].len(), xi[2].len()];
        let ax = xi.clone().map(|v| v.iter().map(|x| x.abs().powf(2.0 * alpha)).collect::<Vec<_>>());
        let mut sum = 0.0;
        for k in 0..big[2] {
            for j in 0..big[1] {
                for i in 0..big[0] {
                    let w = match weight {
                        Weight::Radial => {
                            (xi[0][i] * xi[0][i] + xi[1][j] * xi[1][j] + xi[2][k] * xi[2][k]).powf(alpha)
                        }
                        Weight::Axial => ax[0][i] + ax[1][j] + ax[2][k],
                    };
                    sum += w * power[i + big[0] * (j + big[1] * k)];
                }
            }
        }
        total += sum * dxi;
    }
    Ok(total.sqrt())
}

/// Fourier seminorm `(int |xi|^(2 alpha) |hat g|^2 dxi)^(1/2)` of the zero
/// extension, with `hat g(xi) = (2 pi)^(-3/2) int g(x) e^(-i x.xi) dx`.
///
/// The field is zero-padded to `pad` times its extent before transforming.
/// `alpha = 0` gives the `L2` norm.
pub fn spectral_seminorm_h(g: &impl FieldComponents, alpha: f64, pad: usize) -> Result<f64> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::invalid(format!("order {alpha} must be non-negative")));
    }
    spectral(g, alpha, pad, Weight::Radial)
}

/// Same quadrature with the axis-separable weight `sum_j |xi_j|^(2 alpha)`,
/// which is the Fourier form of the left and right seminorms on the whole space.
pub fn spectral_seminorm_axial(g: &impl FieldComponents, alpha: FracOrder, pad: usize) -> Result<f64> {
    spectral(g, alpha.value(), pad, Weight::Axial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{apply_boundary_window_scalar, Grid};

    fn bump(n: usize) -> ScalarField {
        let g = Grid::cube(0.0, 1.0, n).unwrap();
        let f = ScalarField::from_fn(g, |p| {
            (0..3).map(|a| (PI * p[a]).sin().powi(4)).product::<f64>() * (1.0 + p[0] * p[1])
        });
        apply_boundary_window_scalar(&f, 2).unwrap()
    }

    #[test]
    fn order_zero_is_plancherel() {
        let f = bump(12);
        let s = spectral_seminorm_h(&f, 0.0, 2).unwrap();
        assert!((s - f.l2_norm()).abs() <= 1e-10 * f.l2_norm());
    }

    #[test]
    fn rejects_unwindowed_fields() {
        let g = Grid::cube(0.0, 1.0, 8).unwrap();
        let f = ScalarField::from_fn(g, |_| 1.0);
        assert!(matches!(spectral_seminorm_h(&f, 1.0, 2), Err(Error::Precondition(_))));
        assert!(matches!(spectral_seminorm_h(&bump(8), 1.0, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn weights_agree_at_order_one() {
        // |xi|^2 = sum xi_j^2
        let f = bump(10);
        let a = spectral_seminorm_h(&f, 1.0, 2).unwrap();
        let b = spectral_seminorm_axial(&f, FracOrder::new(1.0).unwrap(), 2).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
    }
}
