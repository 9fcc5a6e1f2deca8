//! `oracle`: penalty solution against PDHG, the dual QP and, when the data
//! match one, a closed-form benchmark.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::Result;
use crate::grid::{Region, ScalarField, Shape};
use crate::oracle::{analytic_mk_1d, analytic_torsion_1d, brute_force_qp, pdhg_solve, AnalyticBenchmark, QP_MAX_POINTS};

use super::config::FieldPreset;
use super::solve::solve_config;
use super::{num, RunConfig, RunWriter};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub pair: String,
    /// `||a - b||_2 / ||b||_2`.
    pub rel_l2: f64,
    pub sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub s: f64,
    pub benchmark: Option<String>,
    pub pdhg_iterations: usize,
    pub pdhg_gap: f64,
    pub pdhg_converged: bool,
    pub pdhg_added_mass: f64,
    pub qp_iterations: Option<usize>,
    pub rows: Vec<ComparisonRow>,
}

/// The closed-form benchmark matching the config, if any: `Omega = (-1, 1)`,
/// `s = 1`, `g = 1`, constant `a` and `f_#`, no other terms.
pub fn matching_benchmark(cfg: &RunConfig) -> Option<AnalyticBenchmark> {
    let plain = matches!(cfg.grid.omega, Shape::Interval { half_width } if half_width == 1.0)
        && cfg.order() == 1.0
        && cfg.threshold.g == FieldPreset::constant(1.0)
        && cfg.operator.b.is_empty()
        && cfg.operator.dvec.is_empty()
        && cfg.operator.c.is_none()
        && cfg.source.f_vec.is_empty();
    if !plain {
        return None;
    }
    let (FieldPreset::Constant { value: a0 }, FieldPreset::Constant { value: f }) = (&cfg.operator.a, &cfg.source.f_sharp)
    else {
        return None;
    };
    if *a0 == 0.0 { analytic_mk_1d(*f).ok() } else { analytic_torsion_1d(*a0, *f).ok() }
}

fn compare(pair: &str, a: &ScalarField, b: &ScalarField) -> Result<ComparisonRow> {
    let diff = a.axpy(-1.0, b)?;
    Ok(ComparisonRow {
        pair: pair.into(),
        rel_l2: diff.lp_norm(2.0, Region::Full)? / b.lp_norm(2.0, Region::Full)?,
        sup: diff.max_abs(),
    })
}

pub fn run_oracle(cfg: &RunConfig, out: Option<&Path>) -> Result<OracleReport> {
    cfg.validate()?;
    let mut writer = out.map(RunWriter::new).transpose()?;
    let outcome = solve_config(cfg, cfg.order())?;
    let problem = &outcome.problem;
    let pen = &outcome.last().solution;
    let pd = pdhg_solve(problem, &cfg.oracle.pdhg)?;
    let qp = if cfg.grid.dim == 1 && cfg.grid.points_per_axis <= QP_MAX_POINTS {
        Some(brute_force_qp(problem, &cfg.oracle.qp)?)
    } else {
        None
    };
    let bench = matching_benchmark(cfg);
    let sampled = bench.as_ref().map(|b| b.sample(&cfg.grid));

    let mut rows = vec![compare("penalty-pdhg", &pen.u, &pd.u)?];
    if let Some(qp) = &qp {
        rows.push(compare("penalty-qp", &pen.u, &qp.u)?);
        rows.push(compare("pdhg-qp", &pd.u, &qp.u)?);
    }
    if let Some((ua, _)) = &sampled {
        rows.push(compare("penalty-analytic", &pen.u, ua)?);
        rows.push(compare("pdhg-analytic", &pd.u, ua)?);
        if let Some(qp) = &qp {
            rows.push(compare("qp-analytic", &qp.u, ua)?);
        }
    }
    let report = OracleReport {
        s: outcome.s,
        benchmark: bench.as_ref().map(|b| b.name.to_string()),
        pdhg_iterations: pd.iterations,
        pdhg_gap: pd.gap,
        pdhg_converged: pd.converged,
        pdhg_added_mass: pd.added_mass,
        qp_iterations: qp.as_ref().map(|q| q.iterations),
        rows,
    };
    if let Some(mut w) = writer.take() {
        w.mark("solve");
        let table: Vec<Vec<String>> =
            report.rows.iter().map(|r| vec![r.pair.clone(), num(r.rel_l2), num(r.sup)]).collect();
        w.csv("comparison.csv", &["pair", "rel_l2", "sup"], &table)?;
        let grid = &cfg.grid;
        let s = Some(outcome.s);
        w.field("penalty/u", grid, &[&pen.u.values], s)?;
        w.field("penalty/lambda", grid, &[&pen.lambda.values], s)?;
        w.field("pdhg/u", grid, &[&pd.u.values], s)?;
        w.field("pdhg/lambda", grid, &[&pd.lambda.values], s)?;
        let mut cols: Vec<(&str, &[f64])> = vec![
            ("u_penalty", &pen.u.values),
            ("lambda_penalty", &pen.lambda.values),
            ("u_pdhg", &pd.u.values),
            ("lambda_pdhg", &pd.lambda.values),
        ];
        if let Some(qp) = &qp {
            w.field("qp/u", grid, &[&qp.u.values], s)?;
            w.field("qp/lambda", grid, &[&qp.lambda.values], s)?;
            cols.push(("u_qp", &qp.u.values));
            cols.push(("lambda_qp", &qp.lambda.values));
        }
        if let Some((ua, la)) = &sampled {
            w.field("analytic/u", grid, &[&ua.values], s)?;
            w.field("analytic/lambda", grid, &[&la.values], s)?;
            cols.push(("u_analytic", &ua.values));
            cols.push(("lambda_analytic", &la.values));
        }
        w.profile("profiles.csv", grid, &cols)?;
        w.finish("oracle", cfg, &report)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torsion_config_has_benchmark() {
        let cfg = RunConfig::torsion_1d(64).unwrap();
        assert_eq!(matching_benchmark(&cfg).unwrap().name, analytic_torsion_1d(1.0, 2.0).unwrap().name);
        let mut mk = cfg.clone();
        mk.operator.a = FieldPreset::constant(0.0);
        assert_eq!(matching_benchmark(&mk).unwrap().name, analytic_mk_1d(2.0).unwrap().name);
        let mut frac = cfg;
        frac.s = Some(0.7);
        assert!(matching_benchmark(&frac).is_none());
    }

    #[test]
    fn writes_comparison_table() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::torsion_1d(64).unwrap();
        cfg.solver.eps_schedule = vec![0.1, 0.03, 0.01];
        let r = run_oracle(&cfg, Some(dir.path())).unwrap();
        assert_eq!(r.rows.len(), 6);
        let pdqp = r.rows.iter().find(|r| r.pair == "pdhg-qp").unwrap();
        assert!(pdqp.rel_l2 < 1e-6);
        assert!(dir.path().join("fields/analytic/u.bin").exists());
    }
}
