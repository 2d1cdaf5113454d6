//! Smooth anisotropic tensor images and known small warps of them.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::VelocityBasis;
use crate::error::Result;
use crate::fields::{Grid, VelocityField};
use crate::flow::{compute_deformation, FlowConfig};
use crate::spd::{warp_tensor_image, SymMat3, TensorImage};

const LAMBDA_PERP: f64 = 0.4;
const LAMBDA_PAR: f64 = 1.7;
const BLOB_GAIN: f64 = 0.8;
const BLOB_WIDTH: f64 = 0.15;

/// Unit principal direction at normalised coordinates `s` in `[0, 1]^3`.
fn principal_direction(s: [f64; 3]) -> [f64; 3] {
    let theta = 0.5 * PI * s[0] + 0.5 * (PI * s[2]).sin();
    let phi = PI * s[1];
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// `lambda_perp I + (lambda_par - lambda_perp) e e^T`, with a smooth direction
/// field `e` and a Gaussian blob raising `lambda_par` at the centre.
pub fn anisotropic_template(grid: Grid) -> Result<TensorImage> {
    let b = grid.bounds();
    TensorImage::from_fn(grid, |p| {
        let s: [f64; 3] = std::array::from_fn(|a| (p[a] - b[a].0) / (b[a].1 - b[a].0));
        let r2: f64 = s.iter().map(|x| (x - 0.5) * (x - 0.5)).sum();
        let par = LAMBDA_PAR + BLOB_GAIN * (-r2 / (2.0 * BLOB_WIDTH * BLOB_WIDTH)).exp();
        let e = principal_direction(s);
        let d = par - LAMBDA_PERP;
        SymMat3([
            LAMBDA_PERP + d * e[0] * e[0],
            d * e[0] * e[1],
            d * e[0] * e[2],
            LAMBDA_PERP + d * e[1] * e[1],
            d * e[1] * e[2],
            LAMBDA_PERP + d * e[2] * e[2],
        ])
    })
}

/// Coefficients uniform in `[-amplitude, amplitude]`, reproducible from `seed`.
pub fn random_coeffs(n: usize, amplitude: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u: f64 = rng.random_range(-1.0..=1.0);
            amplitude * u
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SyntheticPair {
    pub template: TensorImage,
    pub target: TensorImage,
    pub velocity: VelocityField,
    pub coeffs: Vec<f64>,
}

/// Template plus its warp by the flow of a random basis velocity.
pub fn synthetic_pair(basis: &VelocityBasis, amplitude: f64, seed: u64, flow: &FlowConfig) -> Result<SyntheticPair> {
    let template = anisotropic_template(*basis.grid())?;
    let coeffs = random_coeffs(basis.n_coeffs(), amplitude, seed);
    let velocity = basis.basis_to_velocity(&coeffs)?;
    let target = warp_tensor_image(&template, &compute_deformation(&velocity, flow)?)?;
    Ok(SyntheticPair { template, target, velocity, coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_amplitude_reproduces_template() {
        let g = Grid::cube(0.0, 7.0, 8).unwrap();
        let basis = VelocityBasis::new(g, 1.0, 2, 2, 1).unwrap();
        let pair = synthetic_pair(&basis, 0.0, 5, &FlowConfig::new(8).unwrap()).unwrap();
        assert_eq!(pair.template, pair.target);
    }

    #[test]
    fn coefficients_are_seeded() {
        assert_eq!(random_coeffs(10, 0.3, 9), random_coeffs(10, 0.3, 9));
        assert_ne!(random_coeffs(10, 0.3, 9), random_coeffs(10, 0.3, 10));
        assert!(random_coeffs(50, 0.3, 1).iter().all(|c| c.abs() <= 0.3));
    }
}
