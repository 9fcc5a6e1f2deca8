//! First-order primal-dual (Chambolle–Pock) iteration.
//!
//! The primal step solves `(K + I/tau) u = F + v/tau` with a fixed Cholesky
//! factor; the dual step is the prox of `sum g |y|`, a nodewise shrinkage.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::penalty::DiscreteProblem;

use super::{assemble, factor_form, gap_terms, require_convex, OracleSolution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdhgConfig {
    /// Stop when `gap <= tol (1 + |primal|)`.
    pub tol: f64,
    pub max_iters: usize,
    /// Primal step is `tau_scale / ||D||`.
    pub tau_scale: f64,
    pub check_every: usize,
}

impl Default for PdhgConfig {
    fn default() -> Self {
        PdhgConfig { tol: 1e-9, max_iters: 200_000, tau_scale: 10.0, check_every: 50 }
    }
}

fn operator_norm(dmat: &DMatrix<f64>) -> f64 {
    let m = dmat.ncols();
    let mut v = DVector::from_element(m, 1.0 / (m as f64).sqrt());
    let mut est = 0.0;
    for _ in 0..200 {
        let w = dmat.tr_mul(&(dmat * &v));
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        let next = nw.sqrt();
        v = w / nw;
        if (next - est).abs() <= 1e-10 * next {
            est = next;
            break;
        }
        est = next;
    }
    // power iteration underestimates slightly
    est * 1.01
}

pub fn pdhg_solve(problem: &DiscreteProblem, cfg: &PdhgConfig) -> Result<OracleSolution> {
    require_convex(problem)?;
    let (chol, mass) = factor_form(problem)?;
    let m = problem.unknowns();
    let n = problem.nodes();
    let d = problem.grid.dim;
    let hd = problem.grid.cell_volume();
    let norm = operator_norm(&problem.dmat);
    if norm == 0.0 {
        return Err(Error::Discretization("gradient operator vanishes".into()));
    }
    let tau = cfg.tau_scale / norm;
    let sigma = 0.99 / (tau * norm * norm);
    let mut prox_mat = &problem.k_lin + DMatrix::identity(m, m) * (1.0 / tau + mass * hd);
    prox_mat = (&prox_mat + prox_mat.transpose()) * 0.5;
    let prox = Cholesky::new(prox_mat).ok_or_else(|| Error::LinearSolve("primal prox matrix".into()))?;

    let mut u = DVector::zeros(m);
    let mut y = DVector::zeros(d * n);
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    let mut best = None;
    while iterations < cfg.max_iters {
        iterations += 1;
        let rhs = &problem.rhs + &u / tau - problem.dmat.tr_mul(&y);
        let next = prox.solve(&rhs);
        let bar = &next * 2.0 - &u;
        u = next;
        let z = &y + problem.gradient(&bar) * sigma;
        for x in 0..n {
            let mag = (0..d).map(|a| z[a * n + x].powi(2)).sum::<f64>().sqrt();
            let shrink = if mag > 0.0 { (1.0 - sigma * problem.g[x] / mag).max(0.0) } else { 0.0 };
            for a in 0..d {
                y[a * n + x] = z[a * n + x] * shrink;
            }
        }
        if iterations % cfg.check_every == 0 {
            let (p, dv) = gap_terms(problem, &chol, mass, &u, &y);
            gap = p - dv;
            // primal recovered from the dual iterate; exact once y is optimal
            let recovered = chol.solve(&(&problem.rhs - problem.dmat.tr_mul(&y)));
            let (pr, _) = gap_terms(problem, &chol, mass, &recovered, &y);
            if pr - dv < gap {
                gap = pr - dv;
                best = Some(recovered);
            } else {
                best = None;
            }
            if gap <= cfg.tol * (1.0 + p.abs().min(pr.abs())) {
                converged = true;
                break;
            }
        }
    }
    let u = best.unwrap_or(u);
    Ok(assemble(problem, u, &y, iterations, gap, converged, mass))
}
