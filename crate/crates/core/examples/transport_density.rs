//! Degenerate operator (`a = 0`): the transport potential is the distance to
//! the boundary and the multiplier is the transport density.

use fracmk::forms::{OperatorData, SourceData, Threshold};
use fracmk::grid::GridSpec;
use fracmk::oracle::analytic_mk_1d;
use fracmk::penalty::{DiscreteProblem, SolverConfig, TestBattery};

fn main() -> fracmk::Result<()> {
    let grid = GridSpec::interval(1.0, 8.0, 512, 2.0)?;
    let f = 2.0;
    let problem = DiscreteProblem::new(
        &OperatorData::degenerate(&grid),
        &SourceData::constant(&grid, f),
        &Threshold::constant(&grid, 1.0)?,
        1.0,
    )?;
    let cfg = SolverConfig::default();
    let stages = problem.continuation(&cfg, &TestBattery::new(&problem, cfg.seed))?;
    let sol = &stages.last().expect("nonempty schedule").solution;
    let (u_exact, lambda_exact) = analytic_mk_1d(f)?.sample(&grid);
    println!("sup |u - dist| = {:.3e}", sol.u.axpy(-1.0, &u_exact)?.max_abs());
    println!("mass of lambda {:.5} (exact {:.5})", sol.lambda.values.iter().sum::<f64>() * grid.spacing(), f);
    println!("{:>7} {:>10} {:>10}", "x", "lambda", "f|x|");
    for i in (0..grid.len()).step_by(32) {
        let x = grid.coordinate(i);
        if x.abs() < 1.0 {
            println!("{x:>7.3} {:>10.5} {:>10.5}", sol.lambda.values[i], lambda_exact.values[i]);
        }
    }
    Ok(())
}
