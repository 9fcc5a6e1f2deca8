//! `depend`: measured solution differences against the continuous-dependence bounds.
//!
//! Source pairs use
//!
//! ```text
//! ||D^s (u - u^)||_2 <= (C_*/delta) ||f_# - f^_#||_{2#} + (1/delta) ||f - f^||_2
//! ```
//!
//! with `2#` the conjugate of the Sobolev exponent `2^*` (so `2# = 1` when
//! `2s >= d`). Threshold pairs use
//!
//! ```text
//! ||D^s (u - u^)||_2^2 <= C_1 ||g - g^||_inf,   C_1 = (kappa_1 + nu_1 + kappa_2 + nu_2) / delta
//! kappa_i = (M^2/g_*)(||A||_1 + ||b||_1 + ||d||_1 + ||c||_1),  nu_i = (M/g_*)(||f_#||_1 + ||f||_1)
//! M = max(g^*, C_0 g^* / s)
//! ```
//!
//! where `C_0` is the empirical sup-norm Poincaré constant.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::forms::{coercivity_margin, estimate_constants, CoercivityReport, OperatorData, SourceData, Threshold};
use crate::grid::{Region, ScalarField};
use crate::penalty::{DiscreteProblem, TestBattery};
use crate::riesz::checks::{bump_ensemble, estimate_poincare_constant, sobolev_exponent};
use crate::riesz::SpectralOps;

use super::{num, RunConfig, RunWriter};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceRow {
    /// `source` or `threshold`.
    pub kind: String,
    pub label: String,
    /// Size of the data change entering the bound.
    pub size: f64,
    pub measured: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceReport {
    pub s: f64,
    pub coercivity: CoercivityReport,
    /// Empirical `C_0` for the sup norm.
    pub c_zero_inf: f64,
    pub rows: Vec<DependenceRow>,
}

fn l1_box(values: &[f64], hd: f64) -> f64 {
    values.iter().map(|v| v.abs()).sum::<f64>() * hd
}

fn op_l1(op: &OperatorData) -> f64 {
    let hd = op.grid.cell_volume();
    let a: f64 = op.a.iter().map(|m| m.iter().map(|v| v * v).sum::<f64>().sqrt()).sum::<f64>() * hd;
    a + op.b.magnitude().values.iter().sum::<f64>() * hd
        + op.dvec.magnitude().values.iter().sum::<f64>() * hd
        + l1_box(&op.c.values, hd)
}

fn src_l1(src: &SourceData) -> f64 {
    let hd = src.f_sharp.grid.cell_volume();
    l1_box(&src.f_sharp.values, hd) + src.f_vec.magnitude().values.iter().sum::<f64>() * hd
}

pub fn run_dependence(cfg: &RunConfig, out: Option<&Path>) -> Result<DependenceReport> {
    cfg.validate()?;
    let grid = &cfg.grid;
    let s = cfg.order();
    let op = cfg.operator.build(grid)?;
    let consts = estimate_constants(grid, s, cfg.dependence.ensemble, cfg.seed)?;
    let coercivity = coercivity_margin(&op, s, &consts)?;
    if coercivity.delta <= 0.0 {
        return Err(Error::InvalidParameter(format!("dependence needs a coercive form, delta = {}", coercivity.delta)));
    }
    let delta = coercivity.delta;
    let c_zero_inf =
        estimate_poincare_constant(&bump_ensemble(grid, cfg.dependence.ensemble, cfg.seed), s, f64::INFINITY)?;
    let mut writer = out.map(RunWriter::new).transpose()?;

    let src = cfg.source.build(grid)?;
    let thr = cfg.threshold.build(grid)?;
    let solve = |src: &SourceData, thr: &Threshold| -> Result<ScalarField> {
        let p = DiscreteProblem::new(&op, src, thr, s)?;
        let battery = TestBattery::new(&p, cfg.solver.seed);
        let stages = p.continuation(&cfg.solver, &battery)?;
        Ok(stages.last().expect("nonempty schedule").solution.u.clone())
    };
    let base = solve(&src, &thr)?;
    let ops = SpectralOps::new(grid);
    let energy_gap = |u: &ScalarField| -> Result<f64> { ops.gradient(&u.axpy(-1.0, &base)?, s).lp_norm(2.0, Region::Full) };

    let two_star = sobolev_exponent(grid.dim, s);
    let two_sharp = if two_star.is_infinite() { 1.0 } else { two_star / (two_star - 1.0) };
    let perturbed: Vec<(SourceData, ScalarField)> = cfg
        .dependence
        .source_perturbations
        .par_iter()
        .map(|p| {
            let hat = cfg.source.build_perturbed(grid, p)?;
            let u = solve(&hat, &thr)?;
            Ok((hat, u))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (k, (hat, u)) in perturbed.iter().enumerate() {
        let df_sharp = hat.f_sharp.axpy(-1.0, &src.f_sharp)?.lp_norm(two_sharp, Region::Omega)?;
        let df_vec = hat.f_vec.axpy(-1.0, &src.f_vec)?.lp_norm(2.0, Region::Full)?;
        let bound = coercivity.c_star / delta * df_sharp + df_vec / delta;
        let measured = energy_gap(u)?;
        rows.push(DependenceRow {
            kind: "source".into(),
            label: format!("source{k}"),
            size: df_sharp + df_vec,
            measured,
            bound,
            ratio: if bound > 0.0 { measured / bound } else if measured == 0.0 { 0.0 } else { f64::INFINITY },
        });
    }

    let shifted: Vec<(f64, Threshold, ScalarField)> = cfg
        .threshold
        .perturbation
        .par_iter()
        .map(|&eta| {
            let hat = cfg.threshold.build_shifted(grid, eta)?;
            let u = solve(&src, &hat)?;
            Ok((eta, hat, u))
        })
        .collect::<Result<_>>()?;
    let (a_l1, f_l1) = (op_l1(&op), src_l1(&src));
    for (eta, hat, u) in &shifted {
        let gap = hat.g.axpy(-1.0, &thr.g)?.max_abs();
        let g_lo = thr.g_star.min(hat.g_star);
        let g_hi = thr.g_upper.max(hat.g_upper);
        let m = g_hi.max(c_zero_inf * g_hi / s);
        let kappa = m * m / g_lo * a_l1;
        let nu = m / g_lo * f_l1;
        let c1 = 2.0 * (kappa + nu) / delta;
        let measured = energy_gap(u)?.powi(2);
        let bound = c1 * gap;
        rows.push(DependenceRow {
            kind: "threshold".into(),
            label: format!("shift {eta}"),
            size: gap,
            measured,
            bound,
            ratio: if bound > 0.0 { measured / bound } else { 0.0 },
        });
    }

    let report = DependenceReport { s, coercivity, c_zero_inf, rows };
    if let Some(mut w) = writer.take() {
        w.mark("solve");
        let table: Vec<Vec<String>> = report
            .rows
            .iter()
            .map(|r| vec![r.kind.clone(), r.label.clone(), num(r.size), num(r.measured), num(r.bound), num(r.ratio)])
            .collect();
        w.csv("dependence.csv", &["kind", "label", "size", "measured", "bound", "ratio"], &table)?;
        w.field("u", grid, &[&base.values], Some(s))?;
        w.finish("depend", cfg, &report)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{FieldPreset, SourcePreset};

    #[test]
    fn identical_data_gives_zero_difference() {
        let mut cfg = RunConfig::torsion_1d(64).unwrap();
        cfg.s = Some(0.8);
        cfg.solver.eps_schedule = vec![0.1, 0.03];
        cfg.threshold.perturbation = vec![0.0];
        cfg.dependence.source_perturbations = vec![SourcePreset { f_sharp: FieldPreset::constant(0.0), f_vec: vec![] }];
        let r = run_dependence(&cfg, None).unwrap();
        for row in &r.rows {
            assert_eq!(row.measured, 0.0);
        }
        assert_eq!(r.coercivity.delta, 1.0);
    }

    #[test]
    fn degenerate_form_is_rejected() {
        let mut cfg = RunConfig::torsion_1d(64).unwrap();
        cfg.operator.a = FieldPreset::constant(0.0);
        assert!(matches!(run_dependence(&cfg, None), Err(Error::InvalidParameter(_))));
    }
}
