//! Registration energy `int_0^tau |grad^alpha v|^2 dt + |T<>h - D|^2` over a
//! finite sine basis, and its gradient.

mod basis;

pub use basis::VelocityBasis;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fraccalc::{frac_deriv, grad_alpha, FracOrder, Side};
use crate::fields::{ScalarField, VelocityField};
use crate::flow::{compute_deformation, FlowConfig};
use crate::linalg;
use crate::spd::{warp_tensor_image, TensorImage};

/// Dense Gram matrix of the basis in the fractional energy inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl GramMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.entries[p * self.n + q]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::symmetric_eigenvalues(self.n, &self.entries)[0]
    }

    /// `max |Q_pq - Q_qp|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for p in 0..self.n {
            for q in 0..p {
                worst = worst.max((self.get(p, q) - self.get(q, p)).abs());
            }
        }
        worst
    }

    pub fn apply(&self, c: &[f64]) -> Vec<f64> {
        linalg::mat_vec(self.n, &self.entries, c)
    }
}

/// Pairwise `sum_j int d_j^alpha phi_m d_j^alpha phi_m'` of the spatial
/// modes, times trapezoid time weights, block-diagonal across components.
pub fn assemble_gram(basis: &VelocityBasis, alpha: FracOrder, side: Side) -> Result<GramMatrix> {
    let grid = *basis.grid();
    let derivs: Vec<[ScalarField; 3]> = basis
        .modes()
        .iter()
        .map(|m| {
            Ok([
                frac_deriv(m, 0, alpha, side)?,
                frac_deriv(m, 1, alpha, side)?,
                frac_deriv(m, 2, alpha, side)?,
            ])
        })
        .collect::<Result<_>>()?;
    let k = derivs.len();
    let mut spatial = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..=a {
            let mut s = 0.0;
            for j in 0..3 {
                let prod: Vec<f64> = derivs[a][j]
                    .values()
                    .iter()
                    .zip(derivs[b][j].values())
                    .map(|(x, y)| x * y)
                    .collect();
                s += grid.integrate(&prod);
            }
            spatial[a * k + b] = s;
            spatial[b * k + a] = s;
        }
    }
    let tw = basis.time_weights();
    let n = basis.n_coeffs();
    let mut entries = vec![0.0; n * n];
    for (node, w) in tw.iter().enumerate() {
        for c in 0..3 {
            for a in 0..k {
                for b in 0..k {
                    let p = basis.coeff_index(node, c, a);
                    let q = basis.coeff_index(node, c, b);
                    entries[p * n + q] = w * spatial[a * k + b];
                }
            }
        }
    }
    Ok(GramMatrix { n, entries })
}

/// `c^T Q c`.
pub fn regularization_term(coeffs: &[f64], gram: &GramMatrix) -> Result<f64> {
    if coeffs.len() != gram.size() {
        return Err(Error::invalid(format!(
            "expected {} coefficients, got {}",
            gram.size(),
            coeffs.len()
        )));
    }
    Ok(linalg::bilinear(gram.n, &gram.entries, coeffs, coeffs))
}

/// `int_0^tau |grad^alpha v|^2 dt` by direct quadrature of the realised field,
/// trapezoid in time over the snapshots.
pub fn regularization_direct(v: &VelocityField, alpha: FracOrder, side: Side) -> Result<f64> {
    let nt = v.time_nodes();
    let dt = v.time_step();
    let mut total = 0.0;
    for (n, snap) in v.snapshots().iter().enumerate() {
        let w = if n == 0 || n == nt - 1 { 0.5 * dt } else { dt };
        total += w * grad_alpha(snap, alpha, side)?.norm_sq();
    }
    Ok(total)
}

/// `|T<>h - D|^2_{L2(Omega)}` for the flow of `v`.
pub fn data_term(v: &VelocityField, t: &TensorImage, d: &TensorImage, flow: &FlowConfig) -> Result<f64> {
    t.grid().ensure_same(d.grid(), "template and target")?;
    v.grid().ensure_same(t.grid(), "velocity and images")?;
    let deformation = compute_deformation(v, flow)?;
    warp_tensor_image(t, &deformation)?.l2_distance_sq(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub regularization: f64,
    pub data: f64,
    pub total: f64,
    /// `max_x |T(x) - D(x)|^2`
    #[serde(rename = "G")]
    pub g: f64,
    pub volume: f64,
}

impl EnergyBreakdown {
    /// Bound on the energy norm of any iterate that does not exceed the
    /// energy of the zero velocity: `G |Omega|`.
    pub fn existence_bound(&self) -> f64 {
        self.g * self.volume
    }
}

/// Everything needed to evaluate the energy for a coefficient vector.
#[derive(Debug, Clone)]
pub struct EnergyProblem {
    template: TensorImage,
    target: TensorImage,
    basis: VelocityBasis,
    gram: GramMatrix,
    alpha: FracOrder,
    side: Side,
    flow: FlowConfig,
    g: f64,
}

impl EnergyProblem {
    pub fn new(
        template: TensorImage,
        target: TensorImage,
        basis: VelocityBasis,
        alpha: FracOrder,
        side: Side,
        flow: FlowConfig,
    ) -> Result<Self> {
        template.grid().ensure_same(target.grid(), "template and target")?;
        basis.grid().ensure_same(template.grid(), "basis and images")?;
        let flow = flow.validated()?;
        let gram = assemble_gram(&basis, alpha, side)?;
        let g = template.max_sq_distance(&target)?;
        Ok(EnergyProblem { template, target, basis, gram, alpha, side, flow, g })
    }

    pub fn template(&self) -> &TensorImage {
        &self.template
    }

    pub fn target(&self) -> &TensorImage {
        &self.target
    }

    pub fn basis(&self) -> &VelocityBasis {
        &self.basis
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    pub fn alpha(&self) -> FracOrder {
        self.alpha
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn flow(&self) -> &FlowConfig {
        &self.flow
    }

    pub fn n_coeffs(&self) -> usize {
        self.basis.n_coeffs()
    }

    pub fn data(&self, coeffs: &[f64]) -> Result<f64> {
        let v = self.basis.basis_to_velocity(coeffs)?;
        data_term(&v, &self.template, &self.target, &self.flow)
    }

    pub fn warped(&self, coeffs: &[f64]) -> Result<TensorImage> {
        let v = self.basis.basis_to_velocity(coeffs)?;
        warp_tensor_image(&self.template, &compute_deformation(&v, &self.flow)?)
    }

    pub fn total_energy(&self, coeffs: &[f64]) -> Result<EnergyBreakdown> {
        let regularization = regularization_term(coeffs, &self.gram)?;
        let data = self.data(coeffs)?;
        Ok(EnergyBreakdown {
            regularization,
            data,
            total: regularization + data,
            g: self.g,
            volume: self.template.grid().volume(),
        })
    }

    /// `2 Q c` plus central differences of the data term, step
    /// `1e-4 (1 + |c|_inf)`.
    pub fn energy_gradient(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        let reg = self.gram.apply(coeffs);
        let delta = 1e-4 * (1.0 + linalg::max_abs(coeffs));
        let fd = (0..coeffs.len())
            .into_par_iter()
            .map(|i| {
                let mut c = coeffs.to_vec();
                c[i] = coeffs[i] + delta;
                let plus = self.data(&c)?;
                c[i] = coeffs[i] - delta;
                let minus = self.data(&c)?;
                Ok((plus - minus) / (2.0 * delta))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(reg.iter().zip(&fd).map(|(r, f)| 2.0 * r + f).collect())
    }
}

/// Free-function form of [`EnergyProblem::total_energy`].
pub fn total_energy(coeffs: &[f64], problem: &EnergyProblem) -> Result<EnergyBreakdown> {
    problem.total_energy(coeffs)
}

/// Free-function form of [`EnergyProblem::energy_gradient`].
pub fn energy_gradient(coeffs: &[f64], problem: &EnergyProblem) -> Result<Vec<f64>> {
    problem.energy_gradient(coeffs)
}
