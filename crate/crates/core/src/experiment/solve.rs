//! `solve` and `sweep-eps`: one continuation run.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::Result;
use crate::penalty::{DiscreteProblem, KktReport, Stage, TestBattery};

use super::{num, RunConfig, RunWriter};

/// Per-stage summary written to `kkt.csv` and the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRow {
    pub eps: f64,
    pub iterations: usize,
    pub residual_norm: f64,
    pub converged: bool,
    pub kkt: KktReport,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub s: f64,
    pub problem: DiscreteProblem,
    pub stages: Vec<Stage>,
}

impl SolveOutcome {
    pub fn rows(&self) -> Vec<StageRow> {
        self.stages
            .iter()
            .map(|st| StageRow {
                eps: st.eps,
                iterations: st.solution.iterations,
                residual_norm: st.solution.residual_norm,
                converged: st.solution.converged,
                kkt: st.kkt,
            })
            .collect()
    }

    pub fn last(&self) -> &Stage {
        self.stages.last().expect("continuation yields at least one stage")
    }
}

/// Build the problem at order `s` and run the configured continuation.
pub fn solve_config(cfg: &RunConfig, s: f64) -> Result<SolveOutcome> {
    let grid = &cfg.grid;
    let op = cfg.operator.build(grid)?;
    let src = cfg.source.build(grid)?;
    let thr = cfg.threshold.build(grid)?;
    let problem = DiscreteProblem::new(&op, &src, &thr, s)?;
    let battery = TestBattery::new(&problem, cfg.solver.seed);
    let stages = problem.continuation(&cfg.solver, &battery)?;
    Ok(SolveOutcome { s, problem, stages })
}

const KKT_HEADER: [&str; 16] = [
    "stage",
    "eps",
    "iterations",
    "residual_norm",
    "violation_sup",
    "complementarity",
    "equation_residual",
    "penalized_residual",
    "v_measure",
    "k_l1",
    "psi_l1",
    "inactive_mass",
    "energy_identity_ratio",
    "grad_lr",
    "lambda_min",
    "converged",
];

fn kkt_rows(rows: &[StageRow]) -> Vec<Vec<String>> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let k = &r.kkt;
            vec![
                i.to_string(),
                num(r.eps),
                r.iterations.to_string(),
                num(r.residual_norm),
                num(k.violation_sup),
                num(k.complementarity),
                num(k.equation_residual),
                num(k.penalized_residual),
                num(k.v_measure),
                num(k.k_l1),
                num(k.psi_l1),
                num(k.inactive_mass),
                num(k.energy_identity_ratio),
                num(k.grad_lr),
                num(k.lambda_min),
                r.converged.to_string(),
            ]
        })
        .collect()
}

fn write_stage(w: &mut RunWriter, prefix: &str, stage: &Stage, s: f64) -> Result<()> {
    let sol = &stage.solution;
    let grid = sol.u.grid;
    w.field(&format!("{prefix}u"), &grid, &[&sol.u.values], Some(s))?;
    w.field(&format!("{prefix}lambda"), &grid, &[&sol.lambda.values], Some(s))?;
    let psi: Vec<&[f64]> = sol.psi.components.iter().map(|c| c.as_slice()).collect();
    w.field(&format!("{prefix}psi"), &grid, &psi, Some(s))?;
    let grad: Vec<&[f64]> = sol.grad.components.iter().map(|c| c.as_slice()).collect();
    w.field(&format!("{prefix}grad"), &grid, &grad, Some(s))?;
    Ok(())
}

fn run(cfg: &RunConfig, out: Option<&Path>, command: &str, every_stage: bool) -> Result<SolveOutcome> {
    cfg.validate()?;
    let mut writer = out.map(RunWriter::new).transpose()?;
    let outcome = solve_config(cfg, cfg.order())?;
    let Some(mut w) = writer.take() else {
        return Ok(outcome);
    };
    w.mark("solve");
    let rows = outcome.rows();
    w.csv("kkt.csv", &KKT_HEADER, &kkt_rows(&rows))?;
    if every_stage {
        for (i, st) in outcome.stages.iter().enumerate() {
            write_stage(&mut w, &format!("stage{i}/"), st, outcome.s)?;
        }
    }
    let last = outcome.last();
    write_stage(&mut w, "", last, outcome.s)?;
    let sol = &last.solution;
    let mag = sol.grad.magnitude();
    w.profile(
        "profile.csv",
        &cfg.grid,
        &[("u", &sol.u.values), ("lambda", &sol.lambda.values), ("grad_norm", &mag.values)],
    )?;
    w.finish(command, cfg, &serde_json::json!({ "s": outcome.s, "stages": rows }))?;
    Ok(outcome)
}

/// Continuation run; writes the final fields, `kkt.csv` and `profile.csv`.
pub fn run_solve(cfg: &RunConfig, out: Option<&Path>) -> Result<SolveOutcome> {
    run(cfg, out, "solve", false)
}

/// Like [`run_solve`] but also dumps the fields of every stage under `fields/stage<i>/`.
pub fn run_sweep_eps(cfg: &RunConfig, out: Option<&Path>) -> Result<SolveOutcome> {
    run(cfg, out, "sweep-eps", true)
}
