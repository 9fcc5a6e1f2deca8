//! Load a TOML run config and write a full run directory:
//! `cargo run --example config_run -- examples/configs/fractional_disc.toml`.

use std::path::PathBuf;

use fracmk::experiment::{output_root, run_directory, run_solve, RunConfig};

fn main() -> fracmk::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/torsion.toml")));
    let cfg = RunConfig::load(&path)?;
    let dir = run_directory(&output_root(), &cfg, "solve");
    let outcome = run_solve(&cfg, Some(&dir))?;
    let last = outcome.rows().pop().expect("nonempty schedule");
    println!(
        "{}: s = {}, final eps {:.0e}, violation {:.3e}, |lambda|_1 {:.4}",
        cfg.name, outcome.s, last.eps, last.kkt.violation_sup, last.kkt.k_l1
    );
    println!("wrote {}", dir.display());
    Ok(())
}
