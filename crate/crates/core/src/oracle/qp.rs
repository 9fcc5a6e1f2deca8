//! Dual coordinate descent for the nodewise-constrained quadratic program.
//!
//! With `Q = D K^{-1} D^T` the dual is
//! `min_y 1/2 y^T Q y - y^T D K^{-1} F + sum g |y|`, solved one coordinate at a
//! time by soft thresholding. Dense and one-dimensional only.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::penalty::DiscreteProblem;

use super::{assemble, factor_form, gap_terms, require_convex, OracleSolution};

/// Largest grid accepted.
pub const QP_MAX_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QpConfig {
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for QpConfig {
    fn default() -> Self {
        QpConfig { tol: 1e-8, max_sweeps: 100_000 }
    }
}

pub fn brute_force_qp(problem: &DiscreteProblem, cfg: &QpConfig) -> Result<OracleSolution> {
    require_convex(problem)?;
    if problem.grid.dim != 1 || problem.grid.points_per_axis > QP_MAX_POINTS {
        return Err(Error::InvalidGrid(format!(
            "brute-force QP needs d = 1 and n <= {QP_MAX_POINTS}, got d = {}, n = {}",
            problem.grid.dim, problem.grid.points_per_axis
        )));
    }
    let (chol, mass) = factor_form(problem)?;
    let dt = problem.dmat.transpose();
    let b = chol.solve(&dt);
    let q = &problem.dmat * &b;
    let c = problem.gradient(&chol.solve(&problem.rhs));
    let nn = c.len();
    let mut y: DVector<f64> = DVector::zeros(nn);
    let mut qy: DVector<f64> = DVector::zeros(nn);
    let mut gap = f64::INFINITY;
    let mut sweeps = 0;
    let mut converged = false;
    let primal_of = |y: &DVector<f64>| chol.solve(&(&problem.rhs - problem.dmat.tr_mul(y)));
    while sweeps < cfg.max_sweeps {
        sweeps += 1;
        for i in 0..nn {
            let qi = q[(i, i)];
            if qi <= 1e-300 {
                continue;
            }
            let z = y[i] - (qy[i] - c[i]) / qi;
            let thr = problem.g[i] / qi;
            let next = z.signum() * (z.abs() - thr).max(0.0);
            let dy = next - y[i];
            if dy != 0.0 {
                qy.axpy(dy, &q.column(i), 1.0);
                y[i] = next;
            }
        }
        let u = primal_of(&y);
        let (p, dv) = gap_terms(problem, &chol, mass, &u, &y);
        gap = p - dv;
        if gap <= cfg.tol * (1.0 + p.abs()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged { iterations: sweeps, residual: gap });
    }
    let u = primal_of(&y);
    Ok(assemble(problem, u, &y, sweeps, gap, converged, mass))
}
