//! `localize`: solutions along `s -> 1` compared with the local problem.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Region, ScalarField};
use crate::riesz::SpectralOps;

use super::solve::{solve_config, SolveOutcome};
use super::{num, RunConfig, RunWriter};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizeRow {
    pub s: f64,
    /// `||u_s - u_1||_inf`.
    pub sup_error: f64,
    /// `||D^sigma (u_s - u_1)||_{L^2}`.
    pub hsigma_error: f64,
    /// Largest normalized pairing error over the battery.
    pub weak_lambda_error: f64,
    /// `|<lambda_s - lambda_1, phi>| / ||phi||_inf` on `Omega`, one per test function.
    pub weak_lambda_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizeReport {
    pub sigma: f64,
    pub rows: Vec<LocalizeRow>,
}

/// Smooth test functions cut to `Omega`: low-degree monomials in the scaled
/// coordinates and Gaussian bumps. Eight in 1D, nine in 2D.
pub fn weak_test_battery(grid: &GridSpec) -> Vec<ScalarField> {
    let e = grid.omega.extent();
    let bump = |c: [f64; 2], w: f64| {
        move |x: &[f64]| {
            let r2: f64 = x.iter().zip(c).map(|(xi, ci)| (xi / e - ci).powi(2)).sum();
            (-r2 / (2.0 * w * w)).exp()
        }
    };
    let mut out: Vec<ScalarField> = Vec::new();
    if grid.dim == 1 {
        for k in 0..4 {
            out.push(ScalarField::from_fn(grid, |x| (x[0] / e).powi(k)));
        }
        for c in [-0.6, -0.2, 0.2, 0.6] {
            out.push(ScalarField::from_fn(grid, bump([c, 0.0], 0.25)));
        }
    } else {
        out.push(ScalarField::constant(grid, 1.0));
        out.push(ScalarField::from_fn(grid, |x| x[0] / e));
        out.push(ScalarField::from_fn(grid, |x| x[1] / e));
        out.push(ScalarField::from_fn(grid, |x| x[0] * x[1] / (e * e)));
        out.push(ScalarField::from_fn(grid, |x| (x[0] * x[0] + x[1] * x[1]) / (e * e)));
        for c in [[0.4, 0.4], [-0.4, 0.4], [-0.4, -0.4], [0.4, -0.4]] {
            out.push(ScalarField::from_fn(grid, bump(c, 0.3)));
        }
    }
    out.into_iter().map(|f| f.masked()).collect()
}

/// `|<a - b, phi>_Omega| / ||phi||_inf` for each member of the battery.
pub(crate) fn weak_errors(a: &ScalarField, b: &ScalarField, battery: &[ScalarField]) -> Result<Vec<f64>> {
    let diff = a.axpy(-1.0, b)?.masked();
    Ok(battery
        .iter()
        .map(|phi| {
            let sup = phi.max_abs();
            if sup > 0.0 { diff.dot(phi).abs() / sup } else { 0.0 }
        })
        .collect())
}

pub fn run_localize(cfg: &RunConfig, out: Option<&Path>) -> Result<LocalizeReport> {
    cfg.validate()?;
    if cfg.s_list.last() != Some(&1.0) {
        return Err(Error::Config("s_list must end at 1.0".into()));
    }
    let mut writer = out.map(RunWriter::new).transpose()?;
    let outcomes: Vec<SolveOutcome> = cfg.s_list.par_iter().map(|&s| solve_config(cfg, s)).collect::<Result<_>>()?;
    let local = outcomes.last().expect("s_list is nonempty").last();
    let (u1, l1) = (&local.solution.u, &local.solution.lambda);
    let sigma = cfg.localize.sigma;
    let ops = SpectralOps::new(&cfg.grid);
    let battery = weak_test_battery(&cfg.grid);
    let mut rows = Vec::with_capacity(outcomes.len());
    for o in &outcomes {
        let sol = &o.last().solution;
        let diff = sol.u.axpy(-1.0, u1)?;
        let weak = weak_errors(&sol.lambda, l1, &battery)?;
        rows.push(LocalizeRow {
            s: o.s,
            sup_error: diff.max_abs(),
            hsigma_error: ops.gradient(&diff, sigma).lp_norm(2.0, Region::Full)?,
            weak_lambda_error: weak.iter().cloned().fold(0.0, f64::max),
            weak_lambda_errors: weak,
        });
    }
    let report = LocalizeReport { sigma, rows };
    if let Some(mut w) = writer.take() {
        w.mark("solve");
        let mut header = vec!["s".to_string(), "sup_error".into(), "hsigma_error".into(), "weak_lambda_error".into()];
        header.extend((0..battery.len()).map(|k| format!("phi{k}")));
        let header: Vec<&str> = header.iter().map(|h| h.as_str()).collect();
        let table: Vec<Vec<String>> = report
            .rows
            .iter()
            .map(|r| {
                let mut v = vec![num(r.s), num(r.sup_error), num(r.hsigma_error), num(r.weak_lambda_error)];
                v.extend(r.weak_lambda_errors.iter().map(|&e| num(e)));
                v
            })
            .collect();
        w.csv("localize.csv", &header, &table)?;
        for (i, o) in outcomes.iter().enumerate() {
            let sol = &o.last().solution;
            w.field(&format!("s{i}/u"), &cfg.grid, &[&sol.u.values], Some(o.s))?;
            w.field(&format!("s{i}/lambda"), &cfg.grid, &[&sol.lambda.values], Some(o.s))?;
        }
        w.finish("localize", cfg, &report)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_is_cut_to_omega() {
        let g = GridSpec::interval(1.0, 8.0, 64, 2.0).unwrap();
        let b = weak_test_battery(&g);
        assert_eq!(b.len(), 8);
        let inside = g.mask().inside;
        for f in &b {
            assert!(f.max_abs() > 0.0);
            assert!(f.values.iter().zip(&inside).all(|(v, &i)| i || *v == 0.0));
        }
    }

    #[test]
    fn self_comparison_is_zero() {
        let mut cfg = RunConfig::torsion_1d(64).unwrap();
        cfg.s_list = vec![1.0];
        cfg.solver.eps_schedule = vec![0.1, 0.03];
        let r = run_localize(&cfg, None).unwrap();
        assert_eq!(r.rows.len(), 1);
        let row = &r.rows[0];
        assert_eq!((row.sup_error, row.hsigma_error, row.weak_lambda_error), (0.0, 0.0, 0.0));
    }

    #[test]
    fn list_must_end_at_one() {
        let mut cfg = RunConfig::torsion_1d(64).unwrap();
        cfg.s_list = vec![0.8, 0.9];
        assert!(run_localize(&cfg, None).is_err());
    }
}
