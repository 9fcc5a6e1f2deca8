//! End-to-end runs of the binary against a temporary output root.

use std::path::Path;
use std::process::{Command, Output};

use fracmk::experiment::RunConfig;
use fracmk::grid::read_field;

fn fracmk(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracmk"))
        .args(args)
        .env("FRACMK_OUTPUT_ROOT", root)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL: &str = r#"
name = "small"
s = 0.8
[grid]
dim = 1
box_side = 8.0
points_per_axis = 128
buffer = 2.0
omega = { shape = "interval", half_width = 1.0 }
[solver]
eps_schedule = [0.1, 0.03, 0.01]
"#;

#[test]
fn solve_writes_run_directory_under_output_root() {
    let root = tempfile::tempdir().unwrap();
    let cfg = write_config(root.path(), SMALL);
    let out = fracmk(root.path(), &["solve", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = root.path().join("small-solve");
    for f in ["manifest.json", "timings.json", "kkt.csv", "profile.csv", "fields/u.bin", "fields/u.hdr"] {
        assert!(run.join(f).exists(), "missing {f}");
    }
    let (dim, n, _, comps) = read_field(&run.join("fields"), "u").unwrap();
    assert_eq!((dim, n, comps.len()), (1, 128, 1));
    let kkt = std::fs::read_to_string(run.join("kkt.csv")).unwrap();
    assert_eq!(kkt.lines().count(), 4);
}

#[test]
fn manifest_replays_to_the_same_manifest() {
    let root = tempfile::tempdir().unwrap();
    let cfg = write_config(root.path(), SMALL);
    assert!(fracmk(root.path(), &["solve", "--config", &cfg, "--seed", "11"]).status.success());
    let first = root.path().join("small-solve/manifest.json");
    let replay = root.path().join("replay");
    let out = fracmk(
        root.path(),
        &["solve", "--config", first.to_str().unwrap(), "--out", replay.to_str().unwrap(), "--threads", "2"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(replay.join("manifest.json")).unwrap());
    let cfg = RunConfig::load(&first).unwrap();
    assert_eq!(cfg.seed, 11);
}

#[test]
fn unknown_config_key_is_rejected() {
    let root = tempfile::tempdir().unwrap();
    let cfg = write_config(root.path(), &format!("{SMALL}\nsolver_typo = 1\n"));
    let out = fracmk(root.path(), &["solve", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));
}

#[test]
fn verify_kernels_selection_and_exit_codes() {
    let root = tempfile::tempdir().unwrap();
    let none = fracmk(root.path(), &["verify-kernels", "--none"]);
    assert!(none.status.success());
    assert!(String::from_utf8_lossy(&none.stdout).contains("0 rows, 0 failures"));
    let some = fracmk(root.path(), &["verify-kernels", "--check", "adjointness", "--check", "two-path"]);
    assert!(some.status.success());
    let text = std::fs::read_to_string(root.path().join("torsion-verify-kernels/verify.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 + 4);
    let bad = fracmk(root.path(), &["verify-kernels", "--check", "no-such-check"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn fault_injection_makes_verify_fail() {
    let root = tempfile::tempdir().unwrap();
    let cfg = write_config(root.path(), &format!("{SMALL}\n[verify]\nfault_divergence_shift = 0.05\n"));
    let out = fracmk(root.path(), &["verify-kernels", "--config", &cfg, "--check", "adjointness"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL adjointness"));
}

#[test]
fn every_subcommand_runs() {
    let root = tempfile::tempdir().unwrap();
    let body = SMALL.replace("s = 0.8", "s = 0.8\ns_list = [0.8, 0.9, 1.0]");
    let cfg = write_config(root.path(), &body);
    for (cmd, file) in [
        ("sweep-eps", "fields/stage2/u.bin"),
        ("localize", "localize.csv"),
        ("depend", "dependence.csv"),
        ("oracle", "comparison.csv"),
    ] {
        let out = fracmk(root.path(), &[cmd, "--config", &cfg]);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(root.path().join(format!("small-{cmd}")).join(file).exists(), "{cmd} missing {file}");
    }
}
