//! Steepest descent with Armijo backtracking, started from zero velocity.

use serde::{Deserialize, Serialize};

use crate::energy::{EnergyBreakdown, EnergyProblem};
use crate::error::{Error, Result};
use crate::linalg;

/// Largest number of step reductions tried in one line search.
pub const MAX_BACKTRACKS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimConfig {
    pub max_iters: usize,
    pub armijo_c: f64,
    pub backtrack_ratio: f64,
    pub initial_step: f64,
    pub grad_tol: f64,
    pub energy_rel_tol: f64,
    pub seed: u64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig {
            max_iters: 200,
            armijo_c: 1e-4,
            backtrack_ratio: 0.5,
            initial_step: 1.0,
            grad_tol: 1e-6,
            energy_rel_tol: 1e-6,
            seed: 0,
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        let open01 = |x: f64| x > 0.0 && x < 1.0;
        if !open01(self.armijo_c) {
            return Err(Error::invalid(format!("armijo_c {} must lie in (0, 1)", self.armijo_c)));
        }
        if !open01(self.backtrack_ratio) {
            return Err(Error::invalid(format!(
                "backtrack_ratio {} must lie in (0, 1)",
                self.backtrack_ratio
            )));
        }
        for (name, v) in [
            ("initial_step", self.initial_step),
            ("grad_tol", self.grad_tol),
            ("energy_rel_tol", self.energy_rel_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} {v} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    ConvergedGrad,
    ConvergedEnergy,
    MaxIters,
    /// No step passed the sufficient-decrease test; the last accepted iterate is kept.
    LineSearchFailed,
}

/// One row per iterate; `step` is the step that produced it (0 for the start)
/// and `grad_norm` the gradient norm at the iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub iter: usize,
    pub total: f64,
    pub reg: f64,
    pub data: f64,
    pub step: f64,
    pub grad_norm: f64,
}

pub const HISTORY_HEADER: &str = "iter,total,reg,data,step,grad_norm";

impl HistoryRow {
    /// CSV line with shortest round-trip float formatting.
    pub fn csv(&self) -> String {
        format!(
            "{},{:?},{:?},{:?},{:?},{:?}",
            self.iter, self.total, self.reg, self.data, self.step, self.grad_norm
        )
    }
}

pub fn history_csv(rows: &[HistoryRow]) -> String {
    let mut s = String::from(HISTORY_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv());
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistrationResult {
    pub coeffs: Vec<f64>,
    pub history: Vec<HistoryRow>,
    pub initial: EnergyBreakdown,
    pub breakdown: EnergyBreakdown,
    pub bound_ok: bool,
    pub iterations: usize,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmijoStep {
    pub step: f64,
    pub point: Vec<f64>,
    pub value: f64,
    pub backtracks: usize,
}

/// Tries `s = initial_step * ratio^k`, `k = 0..=40`, and accepts the first
/// with `H(c + s d) <= H(c) + armijo_c s <grad, d>`.
pub fn armijo_search(
    c: &[f64],
    direction: &[f64],
    grad: &[f64],
    h_c: f64,
    mut h_eval: impl FnMut(&[f64]) -> Result<f64>,
    cfg: &OptimConfig,
) -> Result<ArmijoStep> {
    let slope = linalg::dot(grad, direction);
    if !(slope < 0.0) {
        return Err(Error::invalid(format!("not a descent direction: <grad, d> = {slope}")));
    }
    let mut step = cfg.initial_step;
    for backtracks in 0..=MAX_BACKTRACKS {
        let point: Vec<f64> = c.iter().zip(direction).map(|(x, d)| x + step * d).collect();
        let value = h_eval(&point)?;
        if value <= h_c + cfg.armijo_c * step * slope {
            return Ok(ArmijoStep { step, point, value, backtracks });
        }
        step *= cfg.backtrack_ratio;
    }
    Err(Error::LineSearch { backtracks: MAX_BACKTRACKS })
}

/// Energy at a trial point; a step whose flow leaves the box or folds is
/// rejected like one that fails the decrease test.
fn trial_energy(problem: &EnergyProblem, c: &[f64]) -> Result<f64> {
    match problem.total_energy(c) {
        Ok(e) => Ok(e.total),
        Err(Error::Integration(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Minimises the energy from `c = 0`.
pub fn register(problem: &EnergyProblem, cfg: &OptimConfig) -> Result<RegistrationResult> {
    cfg.validate()?;
    problem.alpha().check_admissible()?;
    let n = problem.n_coeffs();
    let mut c = vec![0.0; n];
    let initial = problem.total_energy(&c)?;
    let mut current = initial;
    let mut grad = problem.energy_gradient(&c)?;
    let mut history = vec![HistoryRow {
        iter: 0,
        total: initial.total,
        reg: initial.regularization,
        data: initial.data,
        step: 0.0,
        grad_norm: linalg::norm(&grad),
    }];
    let mut termination = Termination::MaxIters;
    let mut iterations = 0;
    for iter in 1..=cfg.max_iters {
        if linalg::norm(&grad) <= cfg.grad_tol {
            termination = Termination::ConvergedGrad;
            break;
        }
        let direction: Vec<f64> = grad.iter().map(|g| -g).collect();
        let accepted = match armijo_search(&c, &direction, &grad, current.total, |p| trial_energy(problem, p), cfg) {
            Ok(a) => a,
            Err(Error::LineSearch { .. }) => {
                termination = Termination::LineSearchFailed;
                break;
            }
            Err(e) => return Err(e),
        };
        let previous = current.total;
        c = accepted.point;
        current = problem.total_energy(&c)?;
        grad = problem.energy_gradient(&c)?;
        iterations = iter;
        history.push(HistoryRow {
            iter,
            total: current.total,
            reg: current.regularization,
            data: current.data,
            step: accepted.step,
            grad_norm: linalg::norm(&grad),
        });
        if (previous - current.total) <= cfg.energy_rel_tol * previous.abs() {
            termination = Termination::ConvergedEnergy;
            break;
        }
    }
    let bound_ok = current.regularization <= current.existence_bound() + 1e-9;
    Ok(RegistrationResult {
        coeffs: c,
        history,
        initial,
        breakdown: current,
        bound_ok,
        iterations,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_step_decreases() {
        let cfg = OptimConfig::default();
        let h = |c: &[f64]| Ok(c[0] * c[0]);
        let got = armijo_search(&[1.0], &[-2.0], &[2.0], 1.0, h, &cfg).unwrap();
        assert!(got.value < 1.0);
        assert!(got.value <= 1.0 + cfg.armijo_c * got.step * -4.0);
        assert_eq!(got.step, 0.5);
    }

    #[test]
    fn ascent_direction_rejected() {
        let cfg = OptimConfig::default();
        let h = |c: &[f64]| Ok(c[0] * c[0]);
        assert!(armijo_search(&[1.0], &[1.0], &[2.0], 1.0, h, &cfg).is_err());
    }

    #[test]
    fn exhausted_backtracks_reported() {
        let cfg = OptimConfig::default();
        let h = |_: &[f64]| Ok(5.0);
        assert!(matches!(
            armijo_search(&[1.0], &[-1.0], &[1.0], 1.0, h, &cfg),
            Err(Error::LineSearch { backtracks: MAX_BACKTRACKS })
        ));
    }

    #[test]
    fn config_ranges() {
        assert!(OptimConfig::default().validate().is_ok());
        let bad = OptimConfig { armijo_c: 1.0, ..OptimConfig::default() };
        assert!(bad.validate().is_err());
        let bad = OptimConfig { initial_step: 0.0, ..OptimConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn csv_rows() {
        let r = HistoryRow { iter: 2, total: 1.5, reg: 0.5, data: 1.0, step: 0.25, grad_norm: 3.0 };
        assert_eq!(r.csv(), "2,1.5,0.5,1.0,0.25,3.0");
    }
}
