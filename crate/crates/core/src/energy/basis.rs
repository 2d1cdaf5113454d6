use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fields::{apply_boundary_window_scalar, check_margin, Grid, ScalarField, VectorField, VelocityField};

/// Separable sine products `prod_a sin(k_a pi (x_a - a_a) / (b_a - a_a))`,
/// `k_a = 1..K`, windowed, attached to every component at every time node.
///
/// Coefficients are laid out time node, then component, then mode:
/// index `(n * 3 + c) * K^3 + m` with `m = ((k1-1) K + (k2-1)) K + (k3-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityBasis {
    grid: Grid,
    horizon: f64,
    time_nodes: usize,
    k_modes: usize,
    margin: usize,
    modes: Vec<ScalarField>,
}

impl VelocityBasis {
    pub fn new(grid: Grid, horizon: f64, time_nodes: usize, k_modes: usize, margin: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid(format!("horizon {horizon} must be positive")));
        }
        if time_nodes < 2 {
            return Err(Error::invalid("at least two time nodes are required"));
        }
        if k_modes < 1 {
            return Err(Error::invalid("at least one mode per axis is required"));
        }
        check_margin(&grid, margin)?;
        let bounds = grid.bounds();
        let mut modes = Vec::with_capacity(k_modes.pow(3));
        for k1 in 1..=k_modes {
            for k2 in 1..=k_modes {
                for k3 in 1..=k_modes {
                    let ks = [k1, k2, k3];
                    let raw = ScalarField::from_fn(grid, |p| {
                        (0..3)
                            .map(|a| {
                                let (lo, hi) = bounds[a];
                                (ks[a] as f64 * PI * (p[a] - lo) / (hi - lo)).sin()
                            })
                            .product()
                    });
                    modes.push(apply_boundary_window_scalar(&raw, margin)?);
                }
            }
        }
        Ok(VelocityBasis { grid, horizon, time_nodes, k_modes, margin, modes })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn time_nodes(&self) -> usize {
        self.time_nodes
    }

    pub fn k_modes(&self) -> usize {
        self.k_modes
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn modes(&self) -> &[ScalarField] {
        &self.modes
    }

    pub fn modes_per_component(&self) -> usize {
        self.modes.len()
    }

    pub fn n_coeffs(&self) -> usize {
        self.time_nodes * 3 * self.modes.len()
    }

    pub fn coeff_index(&self, node: usize, component: usize, mode: usize) -> usize {
        (node * 3 + component) * self.modes.len() + mode
    }

    /// Trapezoid weights of the time nodes over `[0, tau]`.
    pub fn time_weights(&self) -> Vec<f64> {
        let dt = self.horizon / (self.time_nodes - 1) as f64;
        let mut w = vec![dt; self.time_nodes];
        w[0] = 0.5 * dt;
        w[self.time_nodes - 1] = 0.5 * dt;
        w
    }

    /// Spatial snapshot at one time node.
    pub fn snapshot(&self, coeffs: &[f64], node: usize) -> Result<VectorField> {
        self.check_len(coeffs)?;
        let comps = [0, 1, 2].map(|c| {
            let mut acc = vec![0.0; self.grid.len()];
            for (m, mode) in self.modes.iter().enumerate() {
                let w = coeffs[self.coeff_index(node, c, m)];
                if w != 0.0 {
                    for (a, v) in acc.iter_mut().zip(mode.values()) {
                        *a += w * v;
                    }
                }
            }
            ScalarField::from_vec_unchecked(self.grid, acc)
        });
        VectorField::new(comps)
    }

    /// Velocity field realised by `coeffs`.
    pub fn basis_to_velocity(&self, coeffs: &[f64]) -> Result<VelocityField> {
        let snaps = (0..self.time_nodes)
            .map(|n| self.snapshot(coeffs, n))
            .collect::<Result<Vec<_>>>()?;
        VelocityField::new(self.grid, self.horizon, snaps, self.margin)
    }

    fn check_len(&self, coeffs: &[f64]) -> Result<()> {
        if coeffs.len() != self.n_coeffs() {
            return Err(Error::invalid(format!(
                "expected {} coefficients, got {}",
                self.n_coeffs(),
                coeffs.len()
            )));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("coefficient {i} is not finite")));
        }
        Ok(())
    }
}
