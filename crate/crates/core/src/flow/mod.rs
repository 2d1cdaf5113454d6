//! Characteristic flow `d eta/ds = v(eta, s)` with its Jacobian
//! `d Theta/ds = grad v(eta, s) Theta`, integrated by classical RK4.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Grid, Interpolate, ScalarField, Stencil, VectorField, VelocityField};
use crate::spd::Mat3;

/// Smallest admissible number of RK4 steps.
pub const MIN_STEPS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub n_steps: usize,
    #[serde(default = "default_clamp")]
    pub clamp_to_box: bool,
}

fn default_clamp() -> bool {
    true
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig { n_steps: 16, clamp_to_box: true }
    }
}

impl FlowConfig {
    pub fn new(n_steps: usize) -> Result<Self> {
        FlowConfig { n_steps, clamp_to_box: true }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.n_steps < MIN_STEPS {
            return Err(Error::invalid(format!(
                "n_steps {} is below the minimum {MIN_STEPS}",
                self.n_steps
            )));
        }
        Ok(self)
    }
}

/// `Forward` integrates from `tau` down to 0 and yields `h`; `Inverse`
/// integrates from 0 up to `tau` and yields `h^-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Inverse,
}

/// End state of one characteristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState {
    pub position: [f64; 3],
    pub theta: Mat3,
    /// RK4 accumulation of `int tr grad v dr` along the path.
    pub trace_integral: f64,
}

/// Velocity blended at every RK4 stage time of one integration, stored
/// node-interleaved so each stage is a single stencil lookup.
struct StageFields {
    grid: Grid,
    /// `2 n + 1` fields at times `t_from + m dt / 2`.
    fields: Vec<Vec<f64>>,
    dt: f64,
    n_steps: usize,
    clamp: bool,
}

impl StageFields {
    fn new(v: &VelocityField, t_from: f64, t_to: f64, cfg: &FlowConfig) -> Result<Self> {
        let cfg = cfg.validated()?;
        let tau = v.horizon();
        for t in [t_from, t_to] {
            if !(t.is_finite() && (0.0..=tau).contains(&t)) {
                return Err(Error::invalid(format!("time {t} outside [0, {tau}]")));
            }
        }
        let n = cfg.n_steps;
        let dt = (t_to - t_from) / n as f64;
        let fields = (0..=2 * n)
            .map(|m| v.interleaved_at(t_from + 0.5 * m as f64 * dt))
            .collect();
        Ok(StageFields { grid: *v.grid(), fields, dt, n_steps: n, clamp: cfg.clamp_to_box })
    }

    fn stencil(&self, m: usize) -> Stencil<'_> {
        Stencil::new(&self.grid, &self.fields[m]).expect("stage field sized from grid")
    }

    fn settle(&self, p: &mut [f64; 3]) -> Result<()> {
        if !p.iter().all(|x| x.is_finite()) {
            return Err(Error::Integration(format!("non-finite position {p:?}")));
        }
        if !self.clamp {
            return Ok(());
        }
        let tol = 1e-12 * self.grid.diameter();
        for (a, x) in p.iter_mut().enumerate() {
            let (lo, hi) = self.grid.bounds()[a];
            let excess = (lo - *x).max(*x - hi);
            if excess > tol {
                return Err(Error::Integration(format!(
                    "trajectory left the box by {excess:e} on axis {a}"
                )));
            }
            *x = x.clamp(lo, hi);
        }
        Ok(())
    }

    fn positions_only(&self, x: [f64; 3]) -> Result<[f64; 3]> {
        let dt = self.dt;
        let mut p = x;
        self.settle(&mut p)?;
        for s in 0..self.n_steps {
            let f0 = self.stencil(2 * s);
            let f1 = self.stencil(2 * s + 1);
            let f2 = self.stencil(2 * s + 2);
            let add = |a: [f64; 3], k: [f64; 3], c: f64| [a[0] + c * k[0], a[1] + c * k[1], a[2] + c * k[2]];
            let k1 = f0.value(p);
            let k2 = f1.value(add(p, k1, 0.5 * dt));
            let k3 = f1.value(add(p, k2, 0.5 * dt));
            let k4 = f2.value(add(p, k3, dt));
            for a in 0..3 {
                p[a] += dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
            }
            self.settle(&mut p)?;
        }
        Ok(p)
    }

    fn full(&self, x: [f64; 3]) -> Result<PathState> {
        type State = ([f64; 3], [f64; 9], f64);
        let rhs = |st: &Stencil<'_>, s: &State| -> State {
            let (val, jac) = st.value_and_jacobian(s.0);
            let mut dth = [0.0; 9];
            for i in 0..3 {
                for j in 0..3 {
                    dth[3 * i + j] = (0..3).map(|k| jac[i][k] * s.1[3 * k + j]).sum();
                }
            }
            (val, dth, jac[0][0] + jac[1][1] + jac[2][2])
        };
        let axpy = |s: &State, k: &State, c: f64| -> State {
            (
                std::array::from_fn(|i| s.0[i] + c * k.0[i]),
                std::array::from_fn(|i| s.1[i] + c * k.1[i]),
                s.2 + c * k.2,
            )
        };
        let dt = self.dt;
        let mut st: State = (x, Mat3::IDENTITY.0, 0.0);
        self.settle(&mut st.0)?;
        for s in 0..self.n_steps {
            let f0 = self.stencil(2 * s);
            let f1 = self.stencil(2 * s + 1);
            let f2 = self.stencil(2 * s + 2);
            let k1 = rhs(&f0, &st);
            let k2 = rhs(&f1, &axpy(&st, &k1, 0.5 * dt));
            let k3 = rhs(&f1, &axpy(&st, &k2, 0.5 * dt));
            let k4 = rhs(&f2, &axpy(&st, &k3, dt));
            let c = dt / 6.0;
            for i in 0..3 {
                st.0[i] += c * (k1.0[i] + 2.0 * k2.0[i] + 2.0 * k3.0[i] + k4.0[i]);
            }
            for i in 0..9 {
                st.1[i] += c * (k1.1[i] + 2.0 * k2.1[i] + 2.0 * k3.1[i] + k4.1[i]);
            }
            st.2 += c * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2);
            self.settle(&mut st.0)?;
            if !(st.1.iter().all(|v| v.is_finite()) && st.2.is_finite()) {
                return Err(Error::Integration("non-finite Jacobian".into()));
            }
        }
        Ok(PathState { position: st.0, theta: Mat3(st.1), trace_integral: st.2 })
    }
}

/// Integrates `eta(s; t_from, x)` and `Theta(s; t_from, x)` from `s = t_from`
/// to `s = t_to` (either order) with `n_steps` RK4 steps.
pub fn integrate_path(
    v: &VelocityField,
    t_from: f64,
    t_to: f64,
    x: [f64; 3],
    cfg: &FlowConfig,
) -> Result<PathState> {
    if !x.iter().all(|c| c.is_finite()) {
        return Err(Error::invalid(format!("non-finite start point {x:?}")));
    }
    StageFields::new(v, t_from, t_to, cfg)?.full(x)
}

fn endpoints(v: &VelocityField, direction: Direction) -> (f64, f64) {
    match direction {
        Direction::Forward => (v.horizon(), 0.0),
        Direction::Inverse => (0.0, v.horizon()),
    }
}

/// Positions of `h` (forward) or `h^-1` (inverse) at every voxel, without Jacobians.
pub fn flow_positions(v: &VelocityField, direction: Direction, cfg: &FlowConfig) -> Result<Vec<[f64; 3]>> {
    let (a, b) = endpoints(v, direction);
    let stages = StageFields::new(v, a, b, cfg)?;
    let grid = *v.grid();
    (0..grid.len())
        .into_par_iter()
        .map(|idx| stages.positions_only(grid.point(idx)))
        .collect()
}

fn flow_states(v: &VelocityField, direction: Direction, cfg: &FlowConfig) -> Result<Vec<PathState>> {
    let (a, b) = endpoints(v, direction);
    let stages = StageFields::new(v, a, b, cfg)?;
    let grid = *v.grid();
    (0..grid.len())
        .into_par_iter()
        .map(|idx| stages.full(grid.point(idx)))
        .collect()
}

fn positions_field(grid: Grid, pts: &[[f64; 3]]) -> VectorField {
    let comps = [0, 1, 2].map(|c| ScalarField::from_vec_unchecked(grid, pts.iter().map(|p| p[c]).collect()));
    VectorField::new(comps).expect("components share one grid")
}

/// Endpoint map of the flow launched from every voxel.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMap {
    positions: VectorField,
    jacobians: Vec<Mat3>,
    direction: Direction,
    n_steps: usize,
}

impl FlowMap {
    /// Checks that positions lie in the closed box and Jacobians have positive determinant.
    pub fn new(positions: VectorField, jacobians: Vec<Mat3>, direction: Direction, n_steps: usize) -> Result<Self> {
        let grid = *positions.grid();
        if jacobians.len() != grid.len() {
            return Err(Error::invalid(format!(
                "expected {} Jacobians, got {}",
                grid.len(),
                jacobians.len()
            )));
        }
        for idx in 0..grid.len() {
            let p = positions.at(idx);
            if !grid.contains(p) {
                return Err(Error::Integration(format!("position {p:?} of voxel {idx} is outside the box")));
            }
            let d = jacobians[idx].det();
            if !(d > 0.0) {
                return Err(Error::Integration(format!("Jacobian determinant {d} at voxel {idx} is not positive")));
            }
        }
        Ok(FlowMap { positions, jacobians, direction, n_steps })
    }

    pub fn grid(&self) -> &Grid {
        self.positions.grid()
    }

    pub fn positions(&self) -> &VectorField {
        &self.positions
    }

    pub fn position(&self, idx: usize) -> [f64; 3] {
        self.positions.at(idx)
    }

    pub fn jacobians(&self) -> &[Mat3] {
        &self.jacobians
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Trilinear interpolation of the position map; points are assumed in the box.
    pub fn map_point(&self, p: [f64; 3]) -> Result<[f64; 3]> {
        self.positions.interp(p)
    }
}

/// Integrates from every voxel in the given direction.
pub fn compute_flow_map(v: &VelocityField, direction: Direction, cfg: &FlowConfig) -> Result<FlowMap> {
    let states = flow_states(v, direction, cfg)?;
    let pts: Vec<[f64; 3]> = states.iter().map(|s| s.position).collect();
    FlowMap::new(
        positions_field(*v.grid(), &pts),
        states.iter().map(|s| s.theta).collect(),
        direction,
        cfg.n_steps,
    )
}

/// `max_x |outer(inner(x)) - x|` over voxels, with `outer` interpolated.
pub fn composition_error(outer: &FlowMap, inner: &FlowMap) -> Result<f64> {
    let grid = *inner.grid();
    outer.grid().ensure_same(&grid, "composition")?;
    let mut worst = 0.0f64;
    for idx in 0..grid.len() {
        let y = outer.map_point(inner.position(idx))?;
        let x = grid.point(idx);
        let d = ((y[0] - x[0]).powi(2) + (y[1] - x[1]).powi(2) + (y[2] - x[2]).powi(2)).sqrt();
        worst = worst.max(d);
    }
    Ok(worst)
}

/// What a tensor warp needs at every voxel `x`: the sample point `h(x)` and
/// the Jacobian `Theta(tau; 0, x)` of the inverse map.
#[derive(Debug, Clone, PartialEq)]
pub struct Deformation {
    grid: Grid,
    positions: Vec<[f64; 3]>,
    jacobians: Vec<Mat3>,
}

impl Deformation {
    pub fn new(grid: Grid, positions: Vec<[f64; 3]>, jacobians: Vec<Mat3>) -> Result<Self> {
        if positions.len() != grid.len() || jacobians.len() != grid.len() {
            return Err(Error::invalid("deformation arrays do not match the grid"));
        }
        Ok(Deformation { grid, positions, jacobians })
    }

    pub fn identity(grid: Grid) -> Self {
        Deformation {
            positions: (0..grid.len()).map(|i| grid.point(i)).collect(),
            jacobians: vec![Mat3::IDENTITY; grid.len()],
            grid,
        }
    }

    /// Positions from the forward map, Jacobians from the inverse map.
    pub fn from_maps(forward: &FlowMap, inverse: &FlowMap) -> Result<Self> {
        if forward.direction() != Direction::Forward || inverse.direction() != Direction::Inverse {
            return Err(Error::invalid("expected a forward and an inverse flow map"));
        }
        forward.grid().ensure_same(inverse.grid(), "deformation")?;
        let grid = *forward.grid();
        Ok(Deformation {
            positions: (0..grid.len()).map(|i| forward.position(i)).collect(),
            jacobians: inverse.jacobians().to_vec(),
            grid,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn position(&self, idx: usize) -> [f64; 3] {
        self.positions[idx]
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn jacobians(&self) -> &[Mat3] {
        &self.jacobians
    }
}

/// Forward positions and inverse Jacobians of the flow of `v`.
pub fn compute_deformation(v: &VelocityField, cfg: &FlowConfig) -> Result<Deformation> {
    let positions = flow_positions(v, Direction::Forward, cfg)?;
    let inverse = flow_states(v, Direction::Inverse, cfg)?;
    let jacobians: Vec<Mat3> = inverse.iter().map(|s| s.theta).collect();
    if let Some(idx) = jacobians.iter().position(|j| !(j.det() > 0.0)) {
        return Err(Error::Integration(format!(
            "Jacobian determinant {} at voxel {idx} is not positive",
            jacobians[idx].det()
        )));
    }
    Deformation::new(*v.grid(), positions, jacobians)
}

/// `(det Theta, exp(int tr grad v))` along the path from `(t, x)` to time `s`.
pub fn det_formula_check(v: &VelocityField, x: [f64; 3], s: f64, t: f64, cfg: &FlowConfig) -> Result<(f64, f64)> {
    let st = integrate_path(v, t, s, x, cfg)?;
    Ok((st.theta.det(), st.trace_integral.exp()))
}

/// Frobenius norm of the finite-difference velocity gradient, maximised over grid nodes.
pub fn sup_grad_norm(field: &VectorField) -> f64 {
    let grid = *field.grid();
    let data = field.interleaved();
    let st = Stencil::new(&grid, &data).expect("interleaved from the same grid");
    (0..grid.len())
        .map(|idx| {
            let (_, jac) = st.value_and_jacobian(grid.point(idx));
            jac.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max)
}

/// `sqrt(3) exp(int_0^s sup_x |grad v(., r)| dr)`, with the supremum taken at
/// the time nodes and integrated piecewise linearly.
pub fn gronwall_bound(v: &VelocityField, s: f64) -> f64 {
    let sups: Vec<f64> = v.snapshots().iter().map(sup_grad_norm).collect();
    let dt = v.time_step();
    let mut integral = 0.0;
    for n in 0..sups.len() - 1 {
        let t0 = n as f64 * dt;
        if s <= t0 {
            break;
        }
        let t1 = (t0 + dt).min(s);
        let frac = (t1 - t0) / dt;
        let end = sups[n] + frac * (sups[n + 1] - sups[n]);
        integral += 0.5 * (sups[n] + end) * (t1 - t0);
    }
    3f64.sqrt() * integral.exp()
}

/// `max |grad u(x) - grad u(y)|_F / |x - y|^lambda` over `n_pairs` random
/// point pairs in the box, with finite-difference gradients.
pub fn holder_modulus(u: &VectorField, lambda: f64, n_pairs: usize, seed: u64) -> Result<f64> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::invalid(format!("Hölder exponent {lambda} must lie in (0, 1]")));
    }
    let grid = *u.grid();
    let data = u.interleaved();
    let st = Stencil::new(&grid, &data)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = grid.bounds();
    let mut sample = || -> [f64; 3] { std::array::from_fn(|a| rng.random_range(b[a].0..=b[a].1)) };
    let mut worst = 0.0f64;
    for _ in 0..n_pairs {
        let x = sample();
        let y = sample();
        let dist = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt();
        if dist == 0.0 {
            continue;
        }
        let (_, gx) = st.value_and_jacobian(x);
        let (_, gy) = st.value_and_jacobian(y);
        let diff: f64 = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| (gx[i][j] - gy[i][j]).powi(2))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(diff / dist.powf(lambda));
    }
    Ok(worst)
}
