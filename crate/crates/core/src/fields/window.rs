use super::{check_margin, Grid, ScalarField, VectorField};
use crate::error::Result;

/// C2 smoothstep `t^3 (10 - 15 t + 6 t^2)`.
fn smoothstep(t: f64) -> f64 {
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// One-axis ramp: zero on the outer `margin` nodes at each end, one from
/// distance `2 * margin` inward.
pub fn window_weights(n: usize, margin: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let d = i.min(n - 1 - i) as f64;
            let m = margin as f64;
            smoothstep(((d - (m - 1.0)) / (m + 1.0)).clamp(0.0, 1.0))
        })
        .collect()
}

fn separable(grid: &Grid, margin: usize) -> Result<Vec<f64>> {
    check_margin(grid, margin)?;
    let [w0, w1, w2] = [0, 1, 2].map(|a| window_weights(grid.dims()[a], margin));
    Ok((0..grid.len())
        .map(|idx| {
            let [i, j, k] = grid.unravel(idx);
            w0[i] * w1[j] * w2[k]
        })
        .collect())
}

pub fn apply_boundary_window_scalar(field: &ScalarField, margin: usize) -> Result<ScalarField> {
    let w = separable(field.grid(), margin)?;
    let values = field.values().iter().zip(&w).map(|(v, w)| v * w).collect();
    Ok(ScalarField::from_vec_unchecked(*field.grid(), values))
}

/// Multiplies every component by the separable boundary ramp.
pub fn apply_boundary_window(field: &VectorField, margin: usize) -> Result<VectorField> {
    let w = separable(field.grid(), margin)?;
    let comps = field.components().clone().map(|c| {
        let grid = *c.grid();
        let values = c.into_values().iter().zip(&w).map(|(v, w)| v * w).collect();
        ScalarField::from_vec_unchecked(grid, values)
    });
    VectorField::new(comps)
}
