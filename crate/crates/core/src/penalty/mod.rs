//! Penalized and regularized approximating problem, its Newton solver,
//! continuation in `eps` and KKT diagnostics.
//!
//! For fixed `eps` the discrete equation is
//!
//! ```text
//! L^s(u, v) + int (k_eps(|D^s u| - g) + eps |D^s u|^{q-2}) D^s u . D^s v = F(v)
//! ```
//!
//! for every nodal basis function `v` on `Omega`. The multiplier estimate is
//! `lambda = k_eps(|D^s u| - g)` and the flux is `Psi = lambda D^s u`.

mod function;
mod kkt;
mod problem;
mod solver;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use function::{energy_density, flux_coefficient, PenaltyFn};
pub use kkt::{kkt_report, KktReport, TestBattery};
pub use problem::DiscreteProblem;
pub use solver::{continuation_solve, solve_fixed_eps, Solution, Stage};

/// Evaluate `k_eps(t)` and its derivative.
pub fn penalty_value(eps: f64, t: f64) -> (f64, f64) {
    let p = PenaltyFn::new(eps);
    (p.value(t), p.derivative(t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Penalty parameter for single solves.
    pub eps: f64,
    /// Regularization power; `ceil(1 + d/s) + 1` when unset.
    pub q: Option<f64>,
    /// Exponent of the reported `||D^s u||_{L^r}`; `q - 1` when unset.
    pub r: Option<f64>,
    pub eps_schedule: Vec<f64>,
    /// Stop when `||residual|| <= newton_tol (1 + ||F||)`.
    pub newton_tol: f64,
    pub max_iters: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Smallest line-search step before giving up.
    pub min_step: f64,
    /// Levenberg shift added to the flux weights of the Jacobian.
    pub levenberg: f64,
    /// Frozen-coefficient sweeps before Newton in the nonsymmetric case.
    pub picard_iters: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps: 1e-3,
            q: None,
            r: None,
            eps_schedule: vec![0.1, 0.03, 0.01, 3e-3, 1e-3],
            newton_tol: 1e-10,
            max_iters: 200,
            armijo: 1e-4,
            min_step: 1e-12,
            levenberg: 1e-6,
            picard_iters: 5,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn q_for(&self, d: usize, s: f64) -> f64 {
        self.q.unwrap_or_else(|| (1.0 + d as f64 / s).ceil() + 1.0)
    }

    pub fn r_for(&self, d: usize, s: f64) -> f64 {
        self.r.unwrap_or_else(|| self.q_for(d, s) - 1.0)
    }

    pub fn validate(&self, d: usize, s: f64) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad(format!("eps must lie in (0, 1), got {}", self.eps));
        }
        let q = self.q_for(d, s);
        if !(q > 1.0 + d as f64 / s) || q <= 2.0 {
            return bad(format!("q must exceed 1 + d/s = {}, got {q}", 1.0 + d as f64 / s));
        }
        if self.r_for(d, s) < 1.0 {
            return bad("r must be at least 1".into());
        }
        if self.eps_schedule.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return bad("eps_schedule entries must lie in (0, 1)".into());
        }
        if self.eps_schedule.windows(2).any(|w| w[1] >= w[0]) {
            return bad("eps_schedule must be strictly decreasing".into());
        }
        if !(self.newton_tol > 0.0) || self.max_iters == 0 {
            return bad("newton_tol must be positive and max_iters nonzero".into());
        }
        if !(self.armijo > 0.0 && self.armijo < 0.5) || !(self.min_step > 0.0) || !(self.levenberg >= 0.0) {
            return bad("invalid line-search or damping parameters".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = SolverConfig::default();
        assert_eq!(c.q_for(1, 1.0), 3.0);
        assert_eq!(c.q_for(1, 0.7), 4.0);
        assert_eq!(c.q_for(2, 0.5), 6.0);
        assert_eq!(c.r_for(1, 0.7), 3.0);
        c.validate(1, 0.7).unwrap();
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = SolverConfig { eps_schedule: vec![0.1, 0.2], ..Default::default() };
        assert!(c.validate(1, 0.5).is_err());
        c.eps_schedule = vec![0.1];
        c.q = Some(2.5);
        assert!(c.validate(1, 0.5).is_err());
        c.q = None;
        c.eps = 1.5;
        assert!(c.validate(1, 0.5).is_err());
    }

    #[test]
    fn penalty_value_pairs() {
        assert_eq!(penalty_value(0.1, -1.0), (0.0, 0.0));
        let (k, dk) = penalty_value(0.5, 0.5);
        assert!((k - (1f64).exp_m1()).abs() < 1e-15);
        assert!((dk - 2.0 * 1f64.exp()).abs() < 1e-14);
    }
}
