use std::f64::consts::PI;

use fracreg::energy::{assemble_gram, regularization_direct, regularization_term, VelocityBasis};
use fracreg::fields::{apply_boundary_window, window_weights, Grid, ScalarField, VectorField, VelocityField};
use fracreg::flow::{compute_deformation, integrate_path, FlowConfig};
use fracreg::fraccalc::{frac_deriv, gamma, line, spectral_seminorm_axial, FracOrder, Side};
use fracreg::spd::{sym_eig, warp_tensor_image};
use fracreg::synthetic::{anisotropic_template, random_coeffs};
use fracreg::verify;

fn order(a: f64) -> FracOrder {
    FracOrder::new(a).unwrap()
}

#[test]
fn power_function_derivatives() {
    for a in [0.5, 1.5] {
        let e256 = verify::derivative_error(a, 256).unwrap();
        let e512 = verify::derivative_error(a, 512).unwrap();
        assert!(e256 <= 0.02, "alpha {a}: {e256}");
        assert!(e512 < e256, "alpha {a}: {e512} !< {e256}");
    }
}

#[test]
fn right_derivative_of_reflected_power() {
    // right derivative of (1 - x)^2 is 2 / Gamma(3 - a) (1 - x)^(2 - a)
    let (n, a) = (256, 0.5);
    let h = 1.0 / (n - 1) as f64;
    let f: Vec<f64> = (0..n).map(|i| (1.0 - i as f64 * h).powi(2)).collect();
    let d = line::right_derivative(&f, h, a);
    let c = 2.0 / gamma(3.0 - a).unwrap();
    for i in 0..n {
        let y = 1.0 - i as f64 * h;
        if y >= 0.1 {
            let exact = c * y.powf(2.0 - a);
            assert!((d[i] - exact).abs() / exact < 0.02, "i {i}: {} vs {exact}", d[i]);
        }
    }
}

#[test]
fn integral_of_power() {
    // I^a x = x^(1 + a) / Gamma(2 + a)
    let (n, a) = (400, 0.7);
    let h = 1.0 / (n - 1) as f64;
    let f: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let g = line::left_integral(&f, h, a);
    let c = 1.0 / gamma(2.0 + a).unwrap();
    for i in 1..n {
        let x = i as f64 * h;
        assert!((g[i] - c * x.powf(1.0 + a)).abs() < 1e-4, "x {x}");
    }
}

#[test]
fn inversion_tightens_with_resolution() {
    for a in [0.4, 1.3, 2.6] {
        let e256 = verify::inversion_error(a, 256, Side::Left);
        let e512 = verify::inversion_error(a, 512, Side::Left);
        assert!(e256 <= 0.05 && e512 <= 0.025, "alpha {a}: {e256} {e512}");
    }
}

/// `hat g(xi)` by direct trapezoid quadrature, no FFT.
fn line_transform_sq(g: &[f64], h: f64, xi: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (i, v) in g.iter().enumerate() {
        let w = if i == 0 || i == g.len() - 1 { 0.5 } else { 1.0 };
        let x = i as f64 * h;
        re += w * v * (xi * x).cos();
        im -= w * v * (xi * x).sin();
    }
    (re * re + im * im) * h * h / (2.0 * PI)
}

#[test]
fn separable_fourier_form_matches_direct_quadrature() {
    let (n, a) = (32, 2.6);
    let h = 1.0 / (n - 1) as f64;
    let w = window_weights(n, 2);
    let g: Vec<f64> = (0..n).map(|i| w[i] * (PI * i as f64 * h).sin().powi(4)).collect();
    let grid = Grid::cube(0.0, 1.0, n).unwrap();
    let f = ScalarField::from_fn(grid, |p| {
        let at = |x: f64| g[(x / h).round() as usize];
        at(p[0]) * at(p[1]) * at(p[2])
    });
    // int |xi|^(2a) |hat g|^2 over |xi| <= pi / h, by the midpoint rule.
    let xi_max = PI / h;
    let steps = 20_000;
    let dxi = xi_max / steps as f64;
    let mut weighted = 0.0;
    for k in 0..steps {
        let xi = (k as f64 + 0.5) * dxi;
        weighted += 2.0 * xi.powf(2.0 * a) * line_transform_sq(&g, h, xi) * dxi;
    }
    let l2: f64 = g.iter().enumerate().map(|(i, v)| {
        let wt = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        wt * v * v * h
    }).sum();
    let oracle = (3.0 * weighted * l2 * l2).sqrt();
    let got = spectral_seminorm_axial(&f, order(a), 4).unwrap();
    assert!((got / oracle - 1.0).abs() < 0.01, "{got} vs {oracle}");
}

#[test]
fn gram_matches_direct_regularization() {
    let grid = Grid::cube(0.0, 1.0, 12).unwrap();
    let basis = VelocityBasis::new(grid, 1.0, 3, 2, 2).unwrap();
    for side in [Side::Left, Side::Right] {
        let gram = assemble_gram(&basis, order(2.6), side).unwrap();
        assert!(gram.asymmetry() <= 1e-12 * gram.entries().iter().fold(0.0f64, |m, x| m.max(x.abs())));
        assert!(gram.min_eigenvalue() > 0.0);
        for seed in 0..3 {
            let c = random_coeffs(basis.n_coeffs(), 0.5, seed);
            let quad = regularization_term(&c, &gram).unwrap();
            let direct = regularization_direct(&basis.basis_to_velocity(&c).unwrap(), order(2.6), side).unwrap();
            assert!((quad - direct).abs() <= 1e-8 * direct, "{quad} vs {direct}");
        }
    }
}

#[test]
fn single_mode_energy() {
    // one mode at one interior node: time weight dt times the mode's seminorm squared
    let grid = Grid::cube(0.0, 1.0, 12).unwrap();
    let basis = VelocityBasis::new(grid, 1.0, 3, 2, 2).unwrap();
    let gram = assemble_gram(&basis, order(1.4), Side::Left).unwrap();
    let mut c = vec![0.0; basis.n_coeffs()];
    let m = 3;
    c[basis.coeff_index(1, 2, m)] = 1.0;
    let mode = &basis.modes()[m];
    let mut s = 0.0;
    for axis in 0..3 {
        let d = frac_deriv(mode, axis, order(1.4), Side::Left).unwrap();
        s += grid.integrate(&d.values().iter().map(|x| x * x).collect::<Vec<_>>());
    }
    let got = regularization_term(&c, &gram).unwrap();
    assert!((got - 0.5 * s).abs() <= 1e-12 * s, "{got} vs {}", 0.5 * s);
}

/// Composition gap of `(0 -> s -> t)` against `(0 -> t)`: positions, Jacobians.
fn semigroup_gap(v: &VelocityField, n_steps: usize) -> (f64, f64) {
    let cfg = FlowConfig::new(n_steps).unwrap();
    let x = [0.4, 0.55, 0.35];
    let (s, t) = (0.35, 0.9);
    let first = integrate_path(v, 0.0, s, x, &cfg).unwrap();
    let second = integrate_path(v, s, t, first.position, &cfg).unwrap();
    let whole = integrate_path(v, 0.0, t, x, &cfg).unwrap();
    let gap = (0..3).map(|a| (second.position[a] - whole.position[a]).abs()).fold(0.0, f64::max);
    (gap, (second.theta * first.theta).max_abs_diff(&whole.theta))
}

#[test]
fn flow_semigroup() {
    // the velocity is only piecewise linear, so the gap shrinks but not at fourth order
    let v = verify::random_admissible_velocity(12, verify::FLOW_AMPLITUDE, 3).unwrap();
    let coarse = semigroup_gap(&v, 64);
    let fine = semigroup_gap(&v, 256);
    assert!(fine.0 < coarse.0 && fine.1 < coarse.1, "{coarse:?} {fine:?}");
    assert!(fine.0 < 1e-6 && fine.1 < 1e-5, "{fine:?}");
}

#[test]
fn backward_path_undoes_forward_path() {
    let v = verify::random_admissible_velocity(12, verify::FLOW_AMPLITUDE, 4).unwrap();
    let cfg = FlowConfig::new(64).unwrap();
    let x = [0.3, 0.6, 0.5];
    let there = integrate_path(&v, 0.0, 1.0, x, &cfg).unwrap();
    let back = integrate_path(&v, 1.0, 0.0, there.position, &cfg).unwrap();
    for a in 0..3 {
        assert!((back.position[a] - x[a]).abs() < 1e-8);
    }
}

#[test]
fn rk4_converges_at_fourth_order() {
    assert!(verify::rk4_order().unwrap() >= 3.9);
}

#[test]
fn rotation_flow_keeps_voxel_spectra() {
    let grid = Grid::cube(0.0, 15.0, 16).unwrap();
    let t = anisotropic_template(grid).unwrap();
    let omega = 0.05;
    let snap = apply_boundary_window(
        &VectorField::from_fn(grid, |p| [-omega * (p[1] - 7.5), omega * (p[0] - 7.5), 0.0]),
        2,
    )
    .unwrap();
    let v = VelocityField::stationary(snap, 1.0, 2, 2).unwrap();
    let def = compute_deformation(&v, &FlowConfig::default()).unwrap();
    let warped = warp_tensor_image(&t, &def).unwrap();
    for idx in 0..grid.len() {
        let pulled = t.interp(def.position(idx));
        let a = sym_eig(&pulled).values;
        let b = sym_eig(&warped.voxels()[idx]).values;
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() <= 1e-9 * a[0].max(1.0), "voxel {idx}");
        }
    }
}

#[test]
fn verify_rows_shrink_under_refinement() {
    let coarse = verify::VerifyConfig::default();
    let fine = verify::VerifyConfig { n_line: 2 * coarse.n_line, n_cube: 2 * coarse.n_cube, ..coarse };
    for a in [0.3, 1.4, 2.6] {
        let c = verify::check_cos_pairing(a, coarse.n_line).unwrap().observed;
        let f = verify::check_cos_pairing(a, fine.n_line).unwrap().observed;
        assert!(f < c, "pairing alpha {a}: {f} !< {c}");
    }
    for a in [0.4, 1.3, 2.6] {
        let c = verify::check_inversion(a, coarse.n_line / 2, 0.05).observed;
        let f = verify::check_inversion(a, fine.n_line / 2, 0.05).observed;
        assert!(f < c, "inversion alpha {a}: {f} !< {c}");
    }
}
