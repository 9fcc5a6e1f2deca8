//! Solutions for `s -> 1` compared with the classical solution.

use fracmk::experiment::{run_localize, RunConfig};

fn main() -> fracmk::Result<()> {
    let mut cfg = RunConfig::torsion_1d(256)?;
    cfg.s_list = vec![0.5, 0.7, 0.8, 0.9, 0.95, 0.99, 1.0];
    cfg.localize.sigma = 0.4;
    let report = run_localize(&cfg, None)?;
    println!("{:>5} {:>11} {:>11} {:>11}", "s", "sup u", "H^sigma", "weak lambda");
    for r in &report.rows {
        println!("{:>5} {:>11.3e} {:>11.3e} {:>11.3e}", r.s, r.sup_error, r.hsigma_error, r.weak_lambda_error);
    }
    Ok(())
}
