//! One-dimensional kernels on uniformly spaced samples. Values outside the
//! sampled interval are taken to be zero.

use super::gamma;

/// Grünwald–Letnikov weights `w_0 = 1`, `w_k = w_{k-1} (1 - (alpha + 1) / k)`.
pub fn gl_weights(alpha: f64, n: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(n);
    let mut prev = 1.0;
    for k in 0..n {
        if k > 0 {
            prev *= 1.0 - (alpha + 1.0) / k as f64;
        }
        w.push(prev);
    }
    w
}

/// Shift of the shifted Grünwald–Letnikov stencil, `round(alpha / 2)`.
/// It keeps the stencil centred for any order.
pub fn gl_shift(alpha: f64) -> usize {
    (alpha / 2.0).round() as usize
}

/// Left-sided derivative on `[a, x]`:
/// `out[j] = h^-alpha * sum_k w_k f[j + p - k]`.
pub fn left_derivative(f: &[f64], h: f64, alpha: f64) -> Vec<f64> {
    let n = f.len();
    let p = gl_shift(alpha);
    let w = gl_weights(alpha, n + p + 1);
    let scale = h.powf(-alpha);
    let mut out = vec![0.0; n];
    for (j, o) in out.iter_mut().enumerate() {
        let top = j + p;
        let k_min = top.saturating_sub(n - 1);
        let mut s = 0.0;
        for k in k_min..=top {
            s += w[k] * f[top - k];
        }
        *o = s * scale;
    }
    out
}

/// Right-sided derivative on `[x, b]`, sign `(-d/dx)^m` included.
pub fn right_derivative(f: &[f64], h: f64, alpha: f64) -> Vec<f64> {
    let rev: Vec<f64> = f.iter().rev().copied().collect();
    let mut out = left_derivative(&rev, h, alpha);
    out.reverse();
    out
}

/// Left fractional integral `1/Gamma(alpha) int_a^x (x - t)^(alpha-1) f(t) dt`
/// by product trapezoid: the kernel is integrated exactly against the
/// piecewise-linear interpolant of `f`.
pub fn left_integral(f: &[f64], h: f64, alpha: f64) -> Vec<f64> {
    let n = f.len();
    let a1 = alpha + 1.0;
    // pw[m] = m^(alpha+1)
    let pw: Vec<f64> = (0..n + 1).map(|m| (m as f64).powf(a1)).collect();
    let interior: Vec<f64> = (0..n)
        .map(|m| if m == 0 { 0.0 } else { pw[m + 1] - 2.0 * pw[m] + pw[m - 1] })
        .collect();
    let scale = h.powf(alpha) / gamma(alpha + 2.0).expect("alpha + 2 > 0");
    let mut out = vec![0.0; n];
    for j in 1..n {
        let jf = j as f64;
        let a0 = pw[j - 1] - (jf - 1.0 - alpha) * jf.powf(alpha);
        let mut s = a0 * f[0];
        for k in 1..j {
            s += interior[j - k] * f[k];
        }
        s += f[j];
        out[j] = s * scale;
    }
    out
}

/// Right fractional integral over `[x, b]`.
pub fn right_integral(f: &[f64], h: f64, alpha: f64) -> Vec<f64> {
    let rev: Vec<f64> = f.iter().rev().copied().collect();
    let mut out = left_integral(&rev, h, alpha);
    out.reverse();
    out
}

/// `f` centred in a zero line `pad` times longer (with at least one zero on each side).
pub fn zero_pad_centered(f: &[f64], pad: usize) -> (Vec<f64>, usize) {
    let n = f.len();
    let total = (n * pad.max(1)).max(n + 2);
    let lo = (total - n) / 2;
    let mut out = vec![0.0; total];
    out[lo..lo + n].copy_from_slice(f);
    (out, lo)
}
