//! Experiment orchestration: config ingestion, sweeps and run directories.
//!
//! Every `run_*` function computes its report and, when given a directory,
//! persists it as
//!
//! ```text
//! <run>/manifest.json   config, command, outputs and summary (no timings)
//! <run>/timings.json    wall-clock seconds per phase
//! <run>/*.csv           tables
//! <run>/fields/*.bin    little-endian f64 dumps, each with a .hdr text header
//! ```
//!
//! The manifest is a pure function of the config, so two runs with the same
//! config and seed write identical manifests, and `--config manifest.json`
//! repeats a run.

mod config;
mod dependence;
mod localize;
mod oracle_run;
mod solve;
mod verify;

use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::Result;
use crate::grid::{write_field, write_slice_csv, GridSpec};

pub use config::{
    DependenceConfig, FieldPreset, LocalizeConfig, OperatorPreset, OracleRunConfig, RunConfig, SourcePreset,
    ThresholdPreset, VerifyConfig,
};
pub use dependence::{run_dependence, DependenceReport, DependenceRow};
pub use localize::{run_localize, weak_test_battery, LocalizeReport, LocalizeRow};
pub use oracle_run::{run_oracle, ComparisonRow, OracleReport};
pub use solve::{run_solve, run_sweep_eps, solve_config, SolveOutcome, StageRow};
pub use verify::{run_verify, CheckRow, VerifyReport, CHECKS};

/// Environment variable naming the root under which run directories are created.
pub const OUTPUT_ROOT_ENV: &str = "FRACMK_OUTPUT_ROOT";

/// `$FRACMK_OUTPUT_ROOT`, or `runs` in the working directory.
pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"))
}

/// `<root>/<output_dir>`, or `<root>/<name>-<command>` when the config names no directory.
pub fn run_directory(root: &Path, cfg: &RunConfig, command: &str) -> PathBuf {
    match &cfg.output_dir {
        Some(dir) => root.join(dir),
        None => root.join(format!("{}-{command}", cfg.name)),
    }
}

/// Collects outputs of one run directory.
pub(crate) struct RunWriter {
    dir: PathBuf,
    outputs: Vec<String>,
    timings: BTreeMap<String, f64>,
    clock: Instant,
}

impl RunWriter {
    pub(crate) fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(RunWriter { dir: dir.to_path_buf(), outputs: Vec::new(), timings: BTreeMap::new(), clock: Instant::now() })
    }

    /// Seconds since the previous mark, recorded under `phase`.
    pub(crate) fn mark(&mut self, phase: &str) {
        let now = Instant::now();
        self.timings.insert(phase.to_string(), (now - self.clock).as_secs_f64());
        self.clock = now;
    }

    pub(crate) fn field(&mut self, stem: &str, grid: &GridSpec, comps: &[&[f64]], s: Option<f64>) -> Result<()> {
        let sub = Path::new("fields").join(stem);
        let (parent, name) = (sub.parent().unwrap_or(Path::new("fields")), sub.file_name().unwrap_or_default());
        write_field(&self.dir.join(parent), &name.to_string_lossy(), grid, comps, s)?;
        let rel = sub.to_string_lossy().replace('\\', "/");
        self.outputs.push(format!("{rel}.bin"));
        self.outputs.push(format!("{rel}.hdr"));
        Ok(())
    }

    pub(crate) fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut text = header.join(",");
        text.push('\n');
        for r in rows {
            text.push_str(&r.join(","));
            text.push('\n');
        }
        std::fs::write(self.dir.join(name), text)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub(crate) fn profile(&mut self, name: &str, grid: &GridSpec, columns: &[(&str, &[f64])]) -> Result<()> {
        write_slice_csv(&self.dir.join(name), grid, columns)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub(crate) fn finish(mut self, command: &str, cfg: &impl Serialize, summary: &impl Serialize) -> Result<PathBuf> {
        self.mark("write");
        self.outputs.sort();
        let manifest = serde_json::json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config": cfg,
            "outputs": self.outputs,
            "summary": summary,
        });
        std::fs::write(self.dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
        std::fs::write(self.dir.join("timings.json"), serde_json::to_string_pretty(&self.timings)? + "\n")?;
        Ok(self.dir)
    }
}

/// Shortest round-trip text of a float, as used in every CSV.
pub(crate) fn num(v: f64) -> String {
    format!("{v}")
}
