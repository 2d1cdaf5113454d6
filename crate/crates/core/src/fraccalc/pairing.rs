use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::{line, FracOrder};
use crate::error::{Error, Result};
use crate::fields::ScalarField;

/// Left/right pairing of a zero-extended field along one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairingResult {
    /// `int D^alpha f * D^alpha* f`
    pub pairing: f64,
    /// `int (D^alpha f)^2`
    pub deriv_norm_sq: f64,
}

impl PairingResult {
    /// Should approach `cos(pi alpha)`.
    pub fn ratio(&self) -> f64 {
        self.pairing / self.deriv_norm_sq
    }
}

/// Integrates `D^alpha f * D^alpha* f` and `(D^alpha f)^2` over the whole line
/// through every grid line parallel to `axis`. Each line is zero-extended to
/// `pad` times its length, centred, so the slowly decaying tail of the left
/// derivative beyond the box is captured.
pub fn cross_pairing(f: &ScalarField, axis: usize, alpha: FracOrder, pad: usize) -> Result<PairingResult> {
    if axis >= 3 {
        return Err(Error::invalid(format!("axis index {axis} out of range 0..3")));
    }
    if pad < 1 {
        return Err(Error::invalid("pad factor must be at least 1"));
    }
    let a = alpha.value();
    let grid = *f.grid();
    let h = grid.spacing()[axis];
    let n = grid.dims()[axis];
    let (o1, o2) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let w1 = grid.trapezoid_weights(o1);
    let w2 = grid.trapezoid_weights(o2);
    let mut pairing = 0.0;
    let mut norm = 0.0;
    let mut ijk = [0usize; 3];
    let mut buf = vec![0.0; n];
    for b in 0..grid.dims()[o2] {
        for c in 0..grid.dims()[o1] {
            ijk[o1] = c;
            ijk[o2] = b;
            for (t, slot) in buf.iter_mut().enumerate() {
                ijk[axis] = t;
                *slot = f.values()[grid.index(ijk[0], ijk[1], ijk[2])];
            }
            if buf.iter().all(|&v| v == 0.0) {
                continue;
            }
            let (ext, _) = line::zero_pad_centered(&buf, pad);
            let l = line::left_derivative(&ext, h, a);
            let r = line::right_derivative(&ext, h, a);
            let lr: f64 = l.iter().zip(&r).map(|(x, y)| x * y).sum();
            let ll: f64 = l.iter().map(|x| x * x).sum();
            let w = w1[c] * w2[b] * h;
            pairing += w * lr;
            norm += w * ll;
        }
    }
    Ok(PairingResult { pairing, deriv_norm_sq: norm })
}

/// Observed and analytic Fourier multipliers of the left derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolCheck {
    pub frequency: f64,
    pub observed: Complex<f64>,
    pub analytic: Complex<f64>,
}

impl SymbolCheck {
    pub fn relative_error(&self) -> f64 {
        (self.observed - self.analytic).norm() / self.analytic.norm()
    }
}

/// Samples a smooth bump modulated by `cos(xi x)` on `[0, 1)` with 2048
/// points, `xi = 2 pi mode`, applies the discrete left derivative, and
/// compares the ratio of transforms at `xi` with `(i xi)^alpha` on the
/// principal branch `|xi|^alpha e^(i alpha pi/2 sign xi)`.
pub fn fourier_symbol_check(alpha: FracOrder, mode: usize) -> Result<SymbolCheck> {
    const N: usize = 2048;
    if mode == 0 || mode >= N / 2 {
        return Err(Error::invalid(format!("mode {mode} must lie in 1..{}", N / 2)));
    }
    let a = alpha.value();
    let h = 1.0 / N as f64;
    let xi = 2.0 * PI * mode as f64 / (N as f64 * h);
    let g: Vec<f64> = (0..N)
        .map(|j| {
            let x = j as f64 * h;
            let t = ((x - 0.25) / 0.5).clamp(0.0, 1.0);
            (PI * t).sin().powi(4) * (xi * x).cos()
        })
        .collect();
    let d = line::left_derivative(&g, h, a);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(N);
    let mut gh: Vec<Complex<f64>> = g.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut dh: Vec<Complex<f64>> = d.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft.process(&mut gh);
    fft.process(&mut dh);
    let observed = dh[mode] / gh[mode];
    let analytic = Complex::from_polar(xi.abs().powf(a), a * PI / 2.0 * xi.signum());
    Ok(SymbolCheck { frequency: xi, observed, analytic })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_symbols() {
        let one = fourier_symbol_check(FracOrder::new(1.0).unwrap(), 4).unwrap();
        assert!(one.relative_error() < 0.01);
        assert!(one.analytic.re.abs() < 1e-9 * one.analytic.im);
        let two = fourier_symbol_check(FracOrder::new(2.0).unwrap(), 4).unwrap();
        assert!(two.relative_error() < 0.01);
        assert!(two.analytic.re < 0.0);
    }

    #[test]
    fn mode_range_checked() {
        assert!(fourier_symbol_check(FracOrder::new(1.0).unwrap(), 0).is_err());
        assert!(fourier_symbol_check(FracOrder::new(1.0).unwrap(), 1024).is_err());
    }
}
