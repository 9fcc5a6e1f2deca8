//! Independent reference solvers and closed-form benchmarks for the
//! symmetric convex case
//!
//! ```text
//! minimize 1/2 L^s(u, u) - F(u)  subject to  |D^s u| <= g at every node.
//! ```
//!
//! Both iterative oracles share the dense operators of
//! [`DiscreteProblem`](crate::penalty::DiscreteProblem) but none of the penalty machinery.

mod analytic;
mod pdhg;
mod qp;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::grid::{ScalarField, VectorField};
use crate::penalty::DiscreteProblem;

pub use analytic::{analytic_mk_1d, analytic_torsion_1d, AnalyticBenchmark, BenchmarkKind};
pub use pdhg::{pdhg_solve, PdhgConfig};
pub use qp::{brute_force_qp, QpConfig, QP_MAX_POINTS};

/// Mass added to a degenerate form before factorization.
pub const DEGENERATE_MASS: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub u: ScalarField,
    pub grad: VectorField,
    /// Multiplier estimate `|y| / (h^d g)` from the dual variable.
    pub lambda: ScalarField,
    pub iterations: usize,
    /// Final primal-dual gap.
    pub gap: f64,
    pub converged: bool,
    /// Mass term added when the form was degenerate.
    pub added_mass: f64,
    pub(crate) coeffs: DVector<f64>,
}

impl OracleSolution {
    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coeffs
    }
}

/// `K u = F` without constraint.
pub fn unconstrained_solve(problem: &DiscreteProblem) -> Result<ScalarField> {
    Ok(problem.extend(&problem.linear_solve()?))
}

fn require_convex(problem: &DiscreteProblem) -> Result<()> {
    if !problem.convex {
        return Err(Error::NotSymmetric("oracles need a symmetric convex form (A symmetric, b = d = 0, c >= 0)".into()));
    }
    Ok(())
}

/// Cholesky factor of `K`, with a tiny mass when `K` is singular.
fn factor_form(problem: &DiscreteProblem) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let k = problem.k_lin.clone();
    let sym = (&k + k.transpose()) * 0.5;
    if let Some(ch) = Cholesky::new(sym.clone()) {
        let diag_min = ch.l_dirty().diagonal().iter().cloned().fold(f64::INFINITY, f64::min);
        if diag_min > 1e-7 * sym.diagonal().amax().sqrt() {
            return Ok((ch, 0.0));
        }
    }
    let hd = problem.grid.cell_volume();
    let mass = DEGENERATE_MASS * hd;
    let shifted = sym + DMatrix::identity(k.nrows(), k.ncols()) * mass;
    let ch = Cholesky::new(shifted).ok_or_else(|| Error::LinearSolve("form is not positive semidefinite".into()))?;
    Ok((ch, DEGENERATE_MASS))
}

/// Primal value at the largest feasible rescaling `theta u` and the dual value.
fn gap_terms(
    problem: &DiscreteProblem,
    chol: &Cholesky<f64, Dyn>,
    mass: f64,
    u: &DVector<f64>,
    y: &DVector<f64>,
) -> (f64, f64) {
    let hd = problem.grid.cell_volume();
    let grad = problem.gradient(u);
    let mags = problem.magnitudes(&grad);
    let theta = mags
        .iter()
        .zip(&problem.g)
        .filter(|(&t, _)| t > 0.0)
        .map(|(&t, &g)| g / t)
        .fold(1.0f64, f64::min);
    let ut = u * theta;
    let kut = &problem.k_lin * &ut + &ut * (mass * hd);
    let primal = 0.5 * ut.dot(&kut) - problem.rhs.dot(&ut);
    let w = &problem.rhs - problem.dmat.tr_mul(y);
    let kinv_w = chol.solve(&w);
    let n = problem.nodes();
    let d = problem.grid.dim;
    let ysum: f64 = (0..n)
        .map(|x| problem.g[x] * (0..d).map(|a| y[a * n + x].powi(2)).sum::<f64>().sqrt())
        .sum();
    (primal, -0.5 * w.dot(&kinv_w) - ysum)
}

fn assemble(
    problem: &DiscreteProblem,
    u: DVector<f64>,
    y: &DVector<f64>,
    iterations: usize,
    gap: f64,
    converged: bool,
    added_mass: f64,
) -> OracleSolution {
    let hd = problem.grid.cell_volume();
    let n = problem.nodes();
    let d = problem.grid.dim;
    let lambda = (0..n)
        .map(|x| (0..d).map(|a| y[a * n + x].powi(2)).sum::<f64>().sqrt() / (hd * problem.g[x]))
        .collect();
    let grad = problem.gradient(&u);
    OracleSolution {
        u: problem.extend(&u),
        grad: problem.gradient_field(&grad),
        lambda: ScalarField { grid: problem.grid, values: lambda },
        iterations,
        gap,
        converged,
        added_mass,
        coeffs: u,
    }
}
