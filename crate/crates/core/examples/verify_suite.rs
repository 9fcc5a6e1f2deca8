//! The kernel identity suite, optionally restricted to named checks:
//! `cargo run --example verify_suite -- adjointness two-path`.

use fracmk::experiment::{run_verify, VerifyConfig, CHECKS};

fn main() -> fracmk::Result<()> {
    let names: Vec<String> = std::env::args().skip(1).collect();
    let cfg = VerifyConfig { checks: (!names.is_empty()).then_some(names), ..VerifyConfig::default() };
    let report = run_verify(&cfg, 0, None)?;
    for r in &report.rows {
        println!("{} {:<16} {:<44} {:.3e} <= {:.3e}", if r.pass { "PASS" } else { "FAIL" }, r.check, r.params, r.measured, r.bound);
    }
    println!("{} rows, {} failures (available: {})", report.rows.len(), report.failures().count(), CHECKS.join(", "));
    Ok(())
}
