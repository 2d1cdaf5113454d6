//! Numerical checks of the identities and bounds the model rests on. Each
//! check produces one [`CheckRow`].

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::VelocityBasis;
use crate::error::Result;
use crate::fields::{apply_boundary_window, apply_boundary_window_scalar, window_weights, Grid, ScalarField, VectorField, VelocityField};
use crate::flow::{compute_flow_map, composition_error, det_formula_check, gronwall_bound, integrate_path, Direction, FlowConfig};
use crate::fraccalc::{
    cross_pairing, fourier_symbol_check, frac_deriv, frac_integral, frequency_powers, integral_bound_constant, line,
    poincare_constant, seminorm_fl, seminorm_fr, spectral_seminorm_axial, spectral_seminorm_h, FracOrder, Side,
};
use crate::spd::{minkowski_det_holds, reorient, rotation_about, rotation_from_jacobian, sym_eig, Mat3, SymMat3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub alpha: Option<f64>,
    pub n: usize,
    pub observed: f64,
    pub target: f64,
    pub pass: bool,
}

pub const CHECK_HEADER: &str = "name,alpha,n,observed,target,pass";

impl CheckRow {
    fn new(name: &str, alpha: Option<f64>, n: usize, observed: f64, target: f64, pass: bool) -> Self {
        CheckRow { name: name.to_string(), alpha, n, observed, target, pass }
    }

    /// Pass iff `observed <= target`.
    fn at_most(name: &str, alpha: Option<f64>, n: usize, observed: f64, target: f64) -> Self {
        CheckRow::new(name, alpha, n, observed, target, observed <= target)
    }

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{:e},{:e},{}",
            self.name,
            self.alpha.map(|a| a.to_string()).unwrap_or_default(),
            self.n,
            self.observed,
            self.target,
            self.pass
        )
    }
}

pub fn checks_csv(rows: &[CheckRow]) -> String {
    let mut s = String::from(CHECK_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv());
        s.push('\n');
    }
    s
}

/// Coefficient amplitude of the random velocities used by the flow checks.
pub const FLOW_AMPLITUDE: f64 = 0.15;

fn order(a: f64) -> FracOrder {
    FracOrder::new(a).expect("positive literal order")
}

// ---------------------------------------------------------------------------
// test inputs

/// `sin^4(pi x)` on `n` points of `[0, 1]`, windowed with margin 2.
pub fn bump_line(n: usize) -> Vec<f64> {
    let h = 1.0 / (n - 1) as f64;
    let w = window_weights(n, 2);
    (0..n).map(|i| w[i] * (PI * i as f64 * h).sin().powi(4)).collect()
}

/// Smooth non-symmetric profile windowed with margin `max(2, n / 32)`.
pub fn inversion_line(n: usize) -> Vec<f64> {
    let h = 1.0 / (n - 1) as f64;
    let w = window_weights(n, (n / 32).max(2));
    (0..n)
        .map(|i| {
            let x = i as f64 * h;
            w[i] * ((PI * x).sin() + 0.5 * (3.0 * PI * x).cos() + 0.3)
        })
        .collect()
}

/// Windowed random combination of `sin^4(pi s) cos(k pi s)` products,
/// `k in {0, 1}` per axis; smooth at grid scale and zero near the boundary.
pub fn smooth_windowed_field(grid: Grid, seed: u64) -> Result<ScalarField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coef: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let b = grid.bounds();
    let f = ScalarField::from_fn(grid, |p| {
        let s: [f64; 3] = std::array::from_fn(|a| (p[a] - b[a].0) / (b[a].1 - b[a].0));
        let bump: [f64; 3] = std::array::from_fn(|a| (PI * s[a]).sin().powi(4));
        let mut acc = 0.0;
        for (m, c) in coef.iter().enumerate() {
            let k = [(m >> 2) & 1, (m >> 1) & 1, m & 1];
            acc += c * (0..3).map(|a| bump[a] * (k[a] as f64 * PI * s[a]).cos()).product::<f64>();
        }
        acc
    });
    apply_boundary_window_scalar(&f, 2)
}

/// Random low-frequency cosine series, not windowed.
pub fn smooth_random_field(grid: Grid, rng: &mut impl Rng) -> ScalarField {
    let terms: Vec<([f64; 3], f64, f64)> = (0..6)
        .map(|_| {
            let k = [0, 1, 2].map(|_| rng.random_range(0..4) as f64);
            (k, rng.random_range(-1.0..=1.0), rng.random_range(0.0..2.0 * PI))
        })
        .collect();
    let b = grid.bounds();
    ScalarField::from_fn(grid, |p| {
        let s: [f64; 3] = std::array::from_fn(|a| (p[a] - b[a].0) / (b[a].1 - b[a].0));
        terms
            .iter()
            .map(|(k, c, ph)| c * (PI * (k[0] * s[0] + k[1] * s[1] + k[2] * s[2]) + ph).cos())
            .sum()
    })
}

/// Random SPD matrix with eigenvalues in `[0.1, 10]` and random orientation.
pub fn random_spd(rng: &mut impl Rng) -> SymMat3 {
    let q = random_rotation(rng);
    let lam: [f64; 3] = std::array::from_fn(|_| 10f64.powf(rng.random_range(-1.0..=1.0)));
    SymMat3::from_mat3(&(q * Mat3::diag(lam) * q.transpose()))
}

pub fn random_rotation(rng: &mut impl Rng) -> Mat3 {
    let axis: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
    let axis = if axis.iter().all(|&x| x == 0.0) { [0.0, 0.0, 1.0] } else { axis };
    rotation_about(axis, rng.random_range(-PI..=PI))
}

/// Random velocity from a `K = 2`, three-node sine basis on `(0, 1)^3`.
pub fn random_admissible_velocity(n: usize, amplitude: f64, seed: u64) -> Result<VelocityField> {
    let grid = Grid::cube(0.0, 1.0, n)?;
    let basis = VelocityBasis::new(grid, 1.0, 3, 2, 2)?;
    let coeffs = crate::synthetic::random_coeffs(basis.n_coeffs(), amplitude, seed);
    basis.basis_to_velocity(&coeffs)
}

/// `v = c x` windowed on `(-1, 1)^3`, stationary.
pub fn linear_velocity(c: f64, n: usize) -> Result<VelocityField> {
    let g = Grid::cube(-1.0, 1.0, n)?;
    let snap = apply_boundary_window(&VectorField::from_fn(g, |p| p.map(|x| c * x)), 2)?;
    VelocityField::stationary(snap, 1.0, 2, 2)
}

// ---------------------------------------------------------------------------
// checks

/// Counts samples violating `|xi^alpha|^2 / 3 <= |xi|^(2 alpha) <= 3 |xi^alpha|^2`.
pub fn check_frequency_bracket(alpha: f64, samples: usize, seed: u64) -> CheckRow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0usize;
    for _ in 0..samples {
        let xi = random_frequency(&mut rng);
        let (radial, axial) = frequency_powers(xi, alpha);
        if !(axial / 3.0 <= radial && radial <= 3.0 * axial) {
            violations += 1;
        }
    }
    CheckRow::at_most("frequency_bracket", Some(alpha), samples, violations as f64, 0.0)
}

/// Same sweep against the sharp constants `min(1, 3^(alpha-1))` and
/// `max(1, 3^(alpha-1))`, attained on the axes and the diagonal.
pub fn check_frequency_bracket_sharp(alpha: f64, samples: usize, seed: u64) -> CheckRow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = 3f64.powf(alpha - 1.0);
    let (lo, hi) = (k.min(1.0), k.max(1.0));
    let mut violations = 0usize;
    for _ in 0..samples {
        let xi = random_frequency(&mut rng);
        let (radial, axial) = frequency_powers(xi, alpha);
        let slack = 1e-12 * radial;
        if !(lo * axial <= radial + slack && radial <= hi * axial + slack) {
            violations += 1;
        }
    }
    CheckRow::at_most("frequency_bracket_sharp", Some(alpha), samples, violations as f64, 0.0)
}

pub fn random_frequency(rng: &mut impl Rng) -> [f64; 3] {
    let scale = 10f64.powf(rng.random_range(-2.0..=2.0));
    std::array::from_fn(|_| scale * rng.random_range(-1.0..=1.0))
}

/// Relative error of the discrete left-derivative multiplier against `(i xi)^alpha`.
pub fn check_symbol(alpha: f64, mode: usize, target: f64) -> Result<CheckRow> {
    let s = fourier_symbol_check(order(alpha), mode)?;
    Ok(CheckRow::at_most("fourier_symbol", Some(alpha), 2048, s.relative_error(), target))
}

/// Pairing ratio on a zero-extended line (pad factor 4) compared with `cos(pi alpha)`.
pub fn pairing_ratio(alpha: f64, n: usize) -> Result<f64> {
    let f = line_field(&bump_line(n))?;
    Ok(cross_pairing(&f, 0, order(alpha), 4)?.ratio())
}

pub fn check_cos_pairing(alpha: f64, n: usize) -> Result<CheckRow> {
    let err = (pairing_ratio(alpha, n)? - (PI * alpha).cos()).abs();
    Ok(CheckRow::at_most("cos_pairing", Some(alpha), n, err, 0.02))
}

/// A 1D profile as an `n x 4 x 4` field, constant across the transverse axes.
pub fn line_field(values: &[f64]) -> Result<ScalarField> {
    let n = values.len();
    let grid = Grid::new([(0.0, 1.0); 3], [n, 4, 4])?;
    Ok(ScalarField::from_vec_unchecked(
        grid,
        (0..grid.len()).map(|idx| values[idx % n]).collect(),
    ))
}

/// `|D^-alpha D^alpha f - f| / |f|` on one line.
pub fn inversion_error(alpha: f64, n: usize, side: Side) -> f64 {
    let f = inversion_line(n);
    let h = 1.0 / (n - 1) as f64;
    let back = match side {
        Side::Left => line::left_integral(&line::left_derivative(&f, h, alpha), h, alpha),
        Side::Right => line::right_integral(&line::right_derivative(&f, h, alpha), h, alpha),
    };
    let num: f64 = back.iter().zip(&f).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = f.iter().map(|b| b * b).sum();
    (num / den).sqrt()
}

pub fn check_inversion(alpha: f64, n: usize, target: f64) -> CheckRow {
    let err = inversion_error(alpha, n, Side::Left).max(inversion_error(alpha, n, Side::Right));
    CheckRow::at_most("inversion", Some(alpha), n, err, target)
}

/// Largest `|D^-alpha f| / (C |f|)` over random fields, axes and sides.
pub fn integral_bound_ratio(alpha: f64, n: usize, samples: usize, seed: u64) -> Result<f64> {
    let grid = Grid::cube(0.0, 1.0, n)?;
    let a = order(alpha);
    let c = integral_bound_constant(&grid, a)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let f = smooth_random_field(grid, &mut rng);
        let norm = f.l2_norm();
        for axis in 0..3 {
            for side in [Side::Left, Side::Right] {
                let g = frac_integral(&f, axis, a, side)?;
                worst = worst.max(g.l2_norm() / (c * norm));
            }
        }
    }
    Ok(worst)
}

/// Largest `|u| / (C |u|_FL)` over random windowed fields.
pub fn poincare_ratio(alpha: f64, n: usize, samples: usize, seed: u64) -> Result<f64> {
    let grid = Grid::cube(0.0, 1.0, n)?;
    let a = order(alpha);
    let c = poincare_constant(&grid, a)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let u = apply_boundary_window_scalar(&smooth_random_field(grid, &mut rng), 2)?;
        worst = worst.max(u.l2_norm() / (c * seminorm_fl(&u, a)?));
    }
    Ok(worst)
}

/// Seminorms of one smooth windowed field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormTriple {
    pub fl: f64,
    pub fr: f64,
    pub h: f64,
    pub axial: f64,
}

pub fn norm_triple(alpha: f64, n: usize, pad: usize, seed: u64) -> Result<NormTriple> {
    let f = smooth_windowed_field(Grid::cube(0.0, 1.0, n)?, seed)?;
    let a = order(alpha);
    Ok(NormTriple {
        fl: seminorm_fl(&f, a)?,
        fr: seminorm_fr(&f, a)?,
        h: spectral_seminorm_h(&f, alpha, pad)?,
        axial: spectral_seminorm_axial(&f, a, pad)?,
    })
}

/// Left/right agreement, agreement with the separable Fourier form, and the
/// radial/separable ratio inside its sharp bracket.
pub fn check_norm_equivalence(alpha: f64, n: usize, seed: u64) -> Result<Vec<CheckRow>> {
    let t = norm_triple(alpha, n, 2, seed)?;
    let k = 3f64.powf(alpha - 1.0);
    let (lo, hi) = (k.min(1.0), k.max(1.0));
    let r = (t.h / t.axial).powi(2);
    Ok(vec![
        CheckRow::at_most("seminorm_left_right", Some(alpha), n, (t.fl / t.fr - 1.0).abs(), 0.05),
        CheckRow::at_most("seminorm_left_fourier", Some(alpha), n, (t.fl / t.axial - 1.0).abs(), 0.05),
        CheckRow::new(
            "seminorm_radial_bracket",
            Some(alpha),
            n,
            r,
            hi,
            lo * (1.0 - 1e-12) <= r && r <= hi * (1.0 + 1e-12),
        ),
    ])
}

/// Largest relative gap between `det Theta` and `exp(int tr grad v)`.
pub fn det_formula_gap(n: usize, fields: usize, seed: u64) -> Result<f64> {
    let cfg = FlowConfig::new(64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for f in 0..fields {
        let v = random_admissible_velocity(n, FLOW_AMPLITUDE, seed.wrapping_add(f as u64))?;
        let x: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.2..0.8));
        let (a, b) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let (ode, formula) = det_formula_check(&v, x, a, b, &cfg)?;
        worst = worst.max((ode - formula).abs() / formula);
    }
    Ok(worst)
}

/// Max error of position and Jacobian against the exponential solution of `v = c x`.
pub fn linear_flow_error(n_steps: usize) -> Result<f64> {
    let c = 0.4;
    let v = linear_velocity(c, 21)?;
    let x = [0.1, -0.08, 0.05];
    let s = 1.0;
    let st = integrate_path(&v, 0.0, s, x, &FlowConfig::new(n_steps)?)?;
    let e = (c * s).exp();
    let pos = (0..3).map(|a| (st.position[a] - x[a] * e).abs()).fold(0.0, f64::max);
    Ok(pos.max(st.theta.max_abs_diff(&Mat3::diag([e; 3]))))
}

/// Observed convergence order `log2(err(N) / err(2N))` on the linear case.
pub fn rk4_order() -> Result<f64> {
    Ok((linear_flow_error(8)? / linear_flow_error(16)?).log2())
}

/// Largest `|Theta(s; 0, x)|_F` relative to the Grönwall bound.
pub fn gronwall_ratio(n: usize, seed: u64) -> Result<f64> {
    let v = random_admissible_velocity(n, FLOW_AMPLITUDE, seed)?;
    let cfg = FlowConfig::new(16)?;
    let map = compute_flow_map(&v, Direction::Inverse, &cfg)?;
    let bound = gronwall_bound(&v, v.horizon());
    Ok(map.jacobians().iter().map(|j| j.frobenius()).fold(0.0, f64::max) / bound)
}

/// `max(|h o h^-1 - id|, |h^-1 o h - id|) / spacing` and the smallest Jacobian determinant.
pub fn inverse_consistency(n: usize, seed: u64) -> Result<(f64, f64)> {
    let v = random_admissible_velocity(n, FLOW_AMPLITUDE, seed)?;
    let cfg = FlowConfig::new(16)?;
    let fwd = compute_flow_map(&v, Direction::Forward, &cfg)?;
    let inv = compute_flow_map(&v, Direction::Inverse, &cfg)?;
    let e = composition_error(&fwd, &inv)?.max(composition_error(&inv, &fwd)?);
    let min_det = fwd
        .jacobians()
        .iter()
        .chain(inv.jacobians())
        .map(|j| j.det())
        .fold(f64::INFINITY, f64::min);
    Ok((e / v.grid().spacing()[0], min_det))
}

/// Largest relative error of `sum lambda = tr A` and `prod lambda = det A`.
pub fn eigen_identity_error(samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let a = random_spd(&mut rng);
        let l = sym_eig(&a).values;
        let tr = (l[0] + l[1] + l[2] - a.trace()).abs() / a.trace().abs();
        let det = (l[0] * l[1] * l[2] - a.det()).abs() / a.det().abs();
        worst = worst.max(tr).max(det);
    }
    worst
}

pub fn minkowski_violations(samples: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .filter(|_| {
            let a = random_spd(&mut rng);
            let b = random_spd(&mut rng);
            !minkowski_det_holds(&a, &b)
        })
        .count()
}

/// `(max |R R^T - I|, max eigenvalue drift under R M R^T)` for random
/// Jacobians (determinant at least 0.01, sign flipped to positive) and random SPD `M`.
pub fn reorientation_errors(samples: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut orth, mut drift) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let mut j = Mat3(std::array::from_fn(|_| rng.random_range(-1.0..=1.0)));
        while j.det().abs() < 1e-2 {
            j = Mat3(std::array::from_fn(|_| rng.random_range(-1.0..=1.0)));
        }
        if j.det() < 0.0 {
            j = j.scale(-1.0);
        }
        let r = rotation_from_jacobian(&j)?;
        orth = orth.max((r * r.transpose()).max_abs_diff(&Mat3::IDENTITY));
        orth = orth.max((r.det() - 1.0).abs());
        let m = random_spd(&mut rng);
        let before = sym_eig(&m).values;
        let after = sym_eig(&reorient(&m, &r)).values;
        for k in 0..3 {
            drift = drift.max((before[k] - after[k]).abs() / before[0]);
        }
    }
    Ok((orth, drift))
}

// ---------------------------------------------------------------------------
// suite

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Points per line for the 1D checks.
    pub n_line: usize,
    /// Points per axis for the seminorm checks.
    pub n_cube: usize,
    /// Points per axis for the flow checks.
    pub n_flow: usize,
    /// Random samples per sweep.
    pub samples: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { n_line: 512, n_cube: 32, n_flow: 16, samples: 100, seed: 7 }
    }
}

/// Runs every check; rows are returned in a fixed order.
pub fn run_suite(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let seed = cfg.seed;

    for a in [0.5, 1.0, 2.0] {
        rows.push(check_frequency_bracket(a, 10 * cfg.samples, seed));
    }
    for a in [0.5, 1.0, 2.7] {
        rows.push(check_frequency_bracket_sharp(a, 10 * cfg.samples, seed));
    }
    for (a, tol) in [(0.5, 0.03), (1.0, 0.01), (2.0, 0.01), (2.6, 0.03)] {
        rows.push(check_symbol(a, 4, tol)?);
    }
    for a in [0.3, 1.4, 2.6] {
        rows.push(check_cos_pairing(a, cfg.n_line)?);
    }
    for a in [0.4, 1.3, 2.6] {
        rows.push(check_inversion(a, cfg.n_line / 2, 0.05));
    }
    for a in [1.4, 2.6] {
        rows.extend(check_norm_equivalence(a, cfg.n_cube, seed)?);
    }
    for a in [0.5, 1.3, 2.6] {
        let n = 12;
        rows.push(CheckRow::at_most(
            "integral_bound",
            Some(a),
            n,
            integral_bound_ratio(a, n, cfg.samples / 4, seed)?,
            1.0,
        ));
        rows.push(CheckRow::at_most(
            "poincare_bound",
            Some(a),
            n,
            poincare_ratio(a, n, cfg.samples / 4, seed)?,
            1.0,
        ));
    }
    rows.push(CheckRow::at_most("linear_flow", None, 64, linear_flow_error(64)?, 1e-6));
    let order = rk4_order()?;
    rows.push(CheckRow::new("rk4_order", None, 16, order, 3.9, order >= 3.9));
    rows.push(CheckRow::at_most("det_formula", None, cfg.n_flow, det_formula_gap(cfg.n_flow, 5, seed)?, 1e-3));
    rows.push(CheckRow::at_most("gronwall", None, cfg.n_flow, gronwall_ratio(cfg.n_flow, seed)?, 1.0));
    let (inv, min_det) = inverse_consistency(cfg.n_flow, seed)?;
    rows.push(CheckRow::at_most("inverse_consistency", None, cfg.n_flow, inv, 2.0));
    rows.push(CheckRow::new("jacobian_positive", None, cfg.n_flow, min_det, 0.0, min_det > 0.0));
    rows.push(CheckRow::at_most("eigen_identities", None, cfg.samples, eigen_identity_error(cfg.samples, seed), 1e-9));
    rows.push(CheckRow::at_most(
        "minkowski",
        None,
        10 * cfg.samples,
        minkowski_violations(10 * cfg.samples, seed) as f64,
        0.0,
    ));
    let (orth, drift) = reorientation_errors(cfg.samples, seed)?;
    rows.push(CheckRow::at_most("rotation_orthogonal", None, cfg.samples, orth, 1e-8));
    rows.push(CheckRow::at_most("reorient_spectrum", None, cfg.samples, drift, 1e-9));
    for a in [2.6, 3.5] {
        let admissible = order_admissible(a);
        let expected = a != 3.5;
        rows.push(CheckRow::new(
            "admissibility",
            Some(a),
            0,
            if admissible { 1.0 } else { 0.0 },
            if expected { 1.0 } else { 0.0 },
            admissible == expected,
        ));
    }
    Ok(rows)
}

/// Whether `alpha` may be used for registration (`alpha > 5/2`, not a half-integer).
pub fn check_registration_order(alpha: f64) -> CheckRow {
    let ok = order_admissible(alpha);
    CheckRow::new("registration_order", Some(alpha), 0, if ok { 1.0 } else { 0.0 }, 1.0, ok)
}

fn order_admissible(a: f64) -> bool {
    FracOrder::new(a).map(|o| o.is_admissible()).unwrap_or(false)
}

/// Discretisation-error helper for the left derivative on a smooth profile
/// (used to show errors shrink under refinement).
pub fn derivative_error(alpha: f64, n: usize) -> Result<f64> {
    // d^alpha x^2 = Gamma(3) / Gamma(3 - alpha) x^(2 - alpha)
    let grid = Grid::new([(0.0, 1.0); 3], [n, 4, 4])?;
    let f = ScalarField::from_fn(grid, |p| p[0] * p[0]);
    let d = frac_deriv(&f, 0, order(alpha), Side::Left)?;
    let c = 2.0 / crate::fraccalc::gamma(3.0 - alpha)?;
    let h = grid.spacing()[0];
    let mut worst = 0.0f64;
    for i in 0..n {
        let x = i as f64 * h;
        // the shifted stencil reads past the right end for alpha > 1/2
        if !(0.1..=0.9).contains(&x) {
            continue;
        }
        let exact = c * x.powf(2.0 - alpha);
        worst = worst.max((d.values()[i] - exact).abs() / exact);
    }
    Ok(worst)
}
