//! Penalty continuation, PDHG and the dual QP on the same discrete problem.

use fracmk::forms::{OperatorData, SourceData, Threshold};
use fracmk::grid::{GridSpec, Region, ScalarField};
use fracmk::oracle::{brute_force_qp, pdhg_solve, PdhgConfig, QpConfig};
use fracmk::penalty::{DiscreteProblem, SolverConfig, TestBattery};

fn rel(a: &ScalarField, b: &ScalarField) -> fracmk::Result<f64> {
    Ok(a.axpy(-1.0, b)?.lp_norm(2.0, Region::Full)? / b.lp_norm(2.0, Region::Full)?)
}

fn main() -> fracmk::Result<()> {
    for (n, s) in [(256, 1.0), (128, 0.7), (128, 0.4)] {
        let grid = GridSpec::interval(1.0, 8.0, n, 2.0)?;
        let p = DiscreteProblem::new(
            &OperatorData::isotropic(&grid, 1.0)?,
            &SourceData::constant(&grid, 2.0),
            &Threshold::constant(&grid, 1.0)?,
            s,
        )?;
        let cfg = SolverConfig::default();
        let pen = p.continuation(&cfg, &TestBattery::new(&p, cfg.seed))?.pop().expect("nonempty schedule").solution.u;
        let pd = pdhg_solve(&p, &PdhgConfig::default())?;
        let qp = brute_force_qp(&p, &QpConfig::default())?;
        println!(
            "n={n} s={s}: penalty-pdhg {:.2e}  penalty-qp {:.2e}  pdhg-qp {:.2e}  (pdhg {} its, qp {} sweeps)",
            rel(&pen, &pd.u)?,
            rel(&pen, &qp.u)?,
            rel(&pd.u, &qp.u)?,
            pd.iterations,
            qp.iterations
        );
    }
    Ok(())
}
