//! `verify-kernels`: the kernel identity suite and the oracle agreement triangle.
//!
//! Each check yields rows `(check, params, measured, bound, pass)`. Monotone
//! trends are reported with the previous value as the bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::forms::{OperatorData, SourceData, Threshold};
use crate::grid::{GridSpec, Region, ScalarField, Shape, VectorField};
use crate::oracle::{brute_force_qp, pdhg_solve, PdhgConfig, QpConfig};
use crate::penalty::{DiscreteProblem, SolverConfig, TestBattery};
use crate::riesz::checks::{
    bump_ensemble, estimate_norm_comparison, estimate_poincare_constant, far_field_check, kernel_norm_ball_quadrature,
    kernel_norm_tail_quadrature, localization_error, sup_outside, tail_decay_check,
};
use crate::riesz::{frac_gradient_direct, kernel_norm_ball, kernel_norm_tail, KernelSum, SpectralOps};

use super::{num, RunWriter, VerifyConfig};

/// Names accepted in `verify.checks`, in execution order.
pub const CHECKS: &[&str] = &[
    "kernel-norms",
    "kernel-limits",
    "approx-identity",
    "adjointness",
    "real-output",
    "laplacian-symbol",
    "two-path",
    "localization",
    "far-field",
    "tail-decay",
    "poincare",
    "norm-comparison",
    "oracle-triangle",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: String,
    pub params: String,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct VerifyReport {
    pub rows: Vec<CheckRow>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.pass)
    }
}

fn row(check: &str, params: String, measured: f64, bound: f64) -> CheckRow {
    CheckRow { check: check.into(), params, measured, bound, pass: measured <= bound }
}

/// Trend row: `measured` must be strictly below `previous`.
fn trend(check: &str, params: String, measured: f64, previous: f64) -> CheckRow {
    CheckRow { check: check.into(), params, measured, bound: previous, pass: measured < previous }
}

/// `exp(-1/(1 - |x|^2))` on the unit ball, zero outside.
pub(crate) fn smooth_bump(grid: &GridSpec) -> ScalarField {
    ScalarField::from_fn(grid, |x| {
        let r2: f64 = x[..grid.dim].iter().map(|v| v * v).sum();
        if r2 < 1.0 { (-1.0 / (1.0 - r2)).exp() } else { 0.0 }
    })
    .masked()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn kernel_norms() -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for d in [1usize, 2] {
        let p = if d == 1 { 1.25 } else { 2.0 };
        for alpha in [0.25, 0.5, 0.75] {
            for r in [0.5, 2.0] {
                let ball = kernel_norm_ball(d, alpha, r)?;
                rows.push(row(
                    "kernel-norms",
                    format!("ball d={d} alpha={alpha} R={r}"),
                    rel(kernel_norm_ball_quadrature(d, alpha, r), ball),
                    1e-6,
                ));
                let tail = kernel_norm_tail(d, alpha, p, r)?;
                rows.push(row(
                    "kernel-norms",
                    format!("tail d={d} alpha={alpha} p={p} R={r}"),
                    rel(kernel_norm_tail_quadrature(d, alpha, p, r), tail),
                    1e-6,
                ));
            }
        }
    }
    Ok(rows)
}

fn kernel_limits() -> Result<Vec<CheckRow>> {
    let alphas = [0.4, 0.2, 0.1, 0.05];
    let mut rows = Vec::new();
    for d in [1usize, 2] {
        for r in [1.0, 2.0] {
            let mut prev = (f64::INFINITY, f64::INFINITY);
            for &a in &alphas {
                let ball = (kernel_norm_ball(d, a, r)? - 1.0).abs();
                let tail = kernel_norm_tail(d, a, 2.0, r)?;
                rows.push(trend("kernel-limits", format!("|ball-1| d={d} R={r} alpha={a}"), ball, prev.0));
                rows.push(trend("kernel-limits", format!("tail d={d} p=2 R={r} alpha={a}"), tail, prev.1));
                prev = (ball, tail);
            }
        }
    }
    Ok(rows)
}

fn approx_identity() -> Result<Vec<CheckRow>> {
    let grid = GridSpec::interval(1.0, 8.0, 512, 2.0)?;
    let g = smooth_bump(&grid);
    let ops = SpectralOps::new(&grid);
    let mut prev = f64::INFINITY;
    let mut rows = Vec::new();
    for a in [0.4, 0.2, 0.1, 0.05] {
        let err = ops.riesz_potential(&g, a).axpy(-1.0, &g)?.max_abs();
        rows.push(trend("approx-identity", format!("alpha={a}"), err, prev));
        prev = err;
    }
    Ok(rows)
}

fn random_field(grid: &GridSpec, rng: &mut ChaCha8Rng) -> ScalarField {
    ScalarField { grid: *grid, values: (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect() }
}

/// Largest `|<u, D^s . xi> + <D^s u, xi>| / (||u|| ||xi||)` over `pairs` random pairs.
pub(crate) fn adjointness_residual(grid: &GridSpec, pairs: usize, seed: u64, div_shift: f64) -> f64 {
    let ops = SpectralOps::new(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let s = rng.gen_range(0.05..=1.0);
        let u = random_field(grid, &mut rng);
        let xi = VectorField { grid: *grid, components: (0..grid.dim).map(|_| random_field(grid, &mut rng).values).collect() };
        let lhs = u.dot(&ops.divergence(&xi, (s + div_shift).min(1.0)));
        let rhs = ops.gradient(&u, s).dot(&xi);
        let scale = u.dot(&u).sqrt() * xi.dot(&xi).sqrt();
        worst = worst.max((lhs + rhs).abs() / scale);
    }
    worst
}

fn adjointness(seed: u64, shift: f64) -> Result<Vec<CheckRow>> {
    let cases = [
        GridSpec::interval(1.0, 8.0, 1024, 2.0)?,
        GridSpec::new(2, 8.0, 128, Shape::Ball { radius: 1.0 }, 2.0)?,
    ];
    Ok(cases
        .iter()
        .map(|g| {
            let r = adjointness_residual(g, 100, seed, shift);
            row("adjointness", format!("d={} n={} pairs=100", g.dim, g.points_per_axis), r, 1e-12)
        })
        .collect())
}

fn real_output(seed: u64) -> Result<Vec<CheckRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut rows = Vec::new();
    for g in [GridSpec::interval(1.0, 8.0, 256, 2.0)?, GridSpec::new(2, 8.0, 64, Shape::Ball { radius: 1.0 }, 2.0)?] {
        let ops = SpectralOps::new(&g);
        let u = random_field(&g, &mut rng);
        let uh = ops.forward(&u.values);
        for s in [0.3, 0.7] {
            let sym = ops.symbol(s);
            let mut worst: f64 = 0.0;
            for a in 0..g.dim {
                let prod = uh.iter().enumerate().map(|(k, z)| z * sym.value(a, k)).collect();
                let out = ops.inverse_complex(prod);
                let re = out.iter().fold(0.0f64, |m, z| m.max(z.re.abs()));
                let im = out.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
                worst = worst.max(im / re.max(f64::MIN_POSITIVE));
            }
            rows.push(row("real-output", format!("d={} s={s}", g.dim), worst, 1e-12));
        }
    }
    Ok(rows)
}

fn laplacian_symbol() -> Result<Vec<CheckRow>> {
    let g = GridSpec::interval(1.0, 8.0, 256, 2.0)?;
    let ops = SpectralOps::new(&g);
    let mut rows = Vec::new();
    for m in [1.0, 3.0, 17.0] {
        let w = 2.0 * std::f64::consts::PI * m / g.box_side;
        let wave = ScalarField::from_fn(&g, |x| (w * x[0]).cos());
        for s in [0.3, 0.6, 1.0] {
            let composed = ops.divergence(&ops.gradient(&wave, s), s);
            let want = wave.scale(-w.powf(2.0 * s));
            let direct = ops.fractional_laplacian(&wave, s);
            let scale = want.max_abs();
            let err = composed.axpy(-1.0, &want)?.max_abs().max(direct.axpy(-1.0, &want)?.max_abs()) / scale;
            rows.push(row("laplacian-symbol", format!("mode={m} s={s}"), err, 1e-10));
        }
    }
    Ok(rows)
}

/// Relative `L^2(Omega_R)` gap between the quadrature and spectral gradients.
pub(crate) fn two_path_gap(grid: &GridSpec, s: f64) -> Result<f64> {
    let u = smooth_bump(grid);
    let mask = grid.mask();
    let direct = frac_gradient_direct(&u, s, &mask.buffer_inside, KernelSum::Periodic)?;
    let spectral = SpectralOps::new(grid).gradient(&u, s);
    let region = Region::Custom(&mask.buffer_inside);
    Ok(direct.axpy(-1.0, &spectral)?.lp_norm(2.0, region)? / spectral.lp_norm(2.0, region)?)
}

fn two_path() -> Result<Vec<CheckRow>> {
    let g = GridSpec::interval(1.0, 4.0, 256, 0.5)?;
    [0.3, 0.5, 0.7, 0.9]
        .iter()
        .map(|&s| Ok(row("two-path", format!("d=1 n=256 L=4 R=0.5 s={s}"), two_path_gap(&g, s)?, 1e-3)))
        .collect()
}

fn localization() -> Result<Vec<CheckRow>> {
    let g = GridSpec::interval(1.0, 8.0, 512, 2.0)?;
    let w = smooth_bump(&g);
    let s_list = [0.7, 0.9, 0.99];
    let errs = localization_error(&w, &s_list)?;
    let mut rows = Vec::new();
    let mut prev = f64::INFINITY;
    for (&s, &e) in s_list.iter().zip(&errs) {
        rows.push(trend("localization", format!("n=512 s={s}"), e, prev));
        prev = e;
    }
    rows.push(row("localization", "n=512 s=0.99 level".into(), prev, 5e-2));
    Ok(rows)
}

fn far_field() -> Result<Vec<CheckRow>> {
    let g = GridSpec::interval(1.0, 8.0, 256, 2.0)?;
    let u = smooth_bump(&g);
    [0.3, 0.6, 0.9]
        .iter()
        .map(|&s| {
            let r = far_field_check(&u, s)?;
            Ok(row("far-field", format!("|D^s u| d(x)^(d+s)/(mu ||u||_1) s={s} nodes={}", r.nodes), r.max_ratio, 1.0))
        })
        .collect()
}

fn tail_decay() -> Result<Vec<CheckRow>> {
    let g = GridSpec::interval(1.0, 8.0, 256, 2.5)?;
    let u = smooth_bump(&g);
    let radii = [1.0, 1.5, 2.0];
    let mut rows = Vec::new();
    for s in [0.5, 0.8] {
        for p in [1.0, 2.0] {
            let tails = tail_decay_check(&u, s, p, &radii)?;
            let mut prev = f64::INFINITY;
            for t in &tails {
                rows.push(trend("tail-decay", format!("tail s={s} p={p} R={}", t.radius), t.tail, prev));
                rows.push(row("tail-decay", format!("normalized s={s} p={p} R={}", t.radius), t.normalized, t.constant));
                prev = t.tail;
            }
        }
        for &r in &radii {
            let (sup, bound) = sup_outside(&u, s, r)?;
            rows.push(row("tail-decay", format!("sup outside s={s} R={r}"), sup, bound));
        }
    }
    Ok(rows)
}

fn poincare(seed: u64) -> Result<Vec<CheckRow>> {
    let g = GridSpec::interval(1.0, 8.0, 256, 2.0)?;
    let ens = bump_ensemble(&g, 64, seed);
    let mut rows = Vec::new();
    for p in [2.0, f64::INFINITY] {
        let vals = [0.5, 0.7, 0.9].iter().map(|&s| estimate_poincare_constant(&ens, s, p)).collect::<Result<Vec<_>>>()?;
        let hi = vals.iter().cloned().fold(0.0, f64::max);
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        rows.push(row("poincare", format!("max/min of s*ratio over s=0.5,0.7,0.9 p={p}"), hi / lo, 2.0));
    }
    Ok(rows)
}

fn norm_comparison(seed: u64) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for (p, q) in [(1.0, 2.0), (2.0, 4.0)] {
        let vals = [256usize, 512]
            .iter()
            .map(|&n| {
                let g = GridSpec::interval(1.0, 8.0, n, 2.0)?;
                estimate_norm_comparison(&bump_ensemble(&g, 64, seed), 0.7, p, q)
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row("norm-comparison", format!("refinement drift p={p} q={q} s=0.7"), rel(vals[1], vals[0]), 0.1));
    }
    Ok(rows)
}

/// Pairwise relative `L^2` distances (penalty-pdhg, penalty-qp, pdhg-qp) on torsion data.
pub(crate) fn oracle_triangle_case(n: usize, s: f64) -> Result<[f64; 3]> {
    let g = GridSpec::interval(1.0, 8.0, n, 2.0)?;
    let p = DiscreteProblem::new(&OperatorData::isotropic(&g, 1.0)?, &SourceData::constant(&g, 2.0), &Threshold::constant(&g, 1.0)?, s)?;
    let cfg = SolverConfig::default();
    let stages = p.continuation(&cfg, &TestBattery::new(&p, cfg.seed))?;
    let pen = &stages.last().expect("nonempty schedule").solution.u;
    let pd = pdhg_solve(&p, &PdhgConfig::default())?.u;
    let qp = brute_force_qp(&p, &QpConfig::default())?.u;
    let d = |a: &ScalarField, b: &ScalarField| -> Result<f64> {
        Ok(a.axpy(-1.0, b)?.lp_norm(2.0, Region::Full)? / b.lp_norm(2.0, Region::Full)?)
    };
    Ok([d(pen, &pd)?, d(pen, &qp)?, d(&pd, &qp)?])
}

fn oracle_triangle() -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for (n, s) in [(256, 1.0), (128, 0.7)] {
        let t = oracle_triangle_case(n, s)?;
        for (name, v) in ["penalty-pdhg", "penalty-qp", "pdhg-qp"].iter().zip(t) {
            rows.push(row("oracle-triangle", format!("torsion n={n} s={s} {name}"), v, 1e-3));
        }
    }
    Ok(rows)
}

fn run_check(name: &str, cfg: &VerifyConfig, seed: u64) -> Result<Vec<CheckRow>> {
    match name {
        "kernel-norms" => kernel_norms(),
        "kernel-limits" => kernel_limits(),
        "approx-identity" => approx_identity(),
        "adjointness" => adjointness(seed, cfg.fault_divergence_shift),
        "real-output" => real_output(seed),
        "laplacian-symbol" => laplacian_symbol(),
        "two-path" => two_path(),
        "localization" => localization(),
        "far-field" => far_field(),
        "tail-decay" => tail_decay(),
        "poincare" => poincare(seed),
        "norm-comparison" => norm_comparison(seed),
        "oracle-triangle" => oracle_triangle(),
        other => Err(Error::Config(format!("unknown check {other:?}; known: {}", CHECKS.join(", ")))),
    }
}

/// Run the selected checks (all when `cfg.checks` is unset) and optionally write `verify.csv`.
pub fn run_verify(cfg: &VerifyConfig, seed: u64, out: Option<&Path>) -> Result<VerifyReport> {
    let selected: Vec<String> = match &cfg.checks {
        Some(list) => list.clone(),
        None => CHECKS.iter().map(|s| s.to_string()).collect(),
    };
    for name in &selected {
        if !CHECKS.contains(&name.as_str()) {
            return Err(Error::Config(format!("unknown check {name:?}; known: {}", CHECKS.join(", "))));
        }
    }
    let mut writer = out.map(RunWriter::new).transpose()?;
    let mut report = VerifyReport::default();
    for name in &selected {
        report.rows.extend(run_check(name, cfg, seed)?);
    }
    if let Some(mut w) = writer.take() {
        w.mark("checks");
        let table: Vec<Vec<String>> = report
            .rows
            .iter()
            .map(|r| vec![r.check.clone(), r.params.clone(), num(r.measured), num(r.bound), r.pass.to_string()])
            .collect();
        w.csv("verify.csv", &["check", "params", "measured", "bound", "pass"], &table)?;
        let summary = serde_json::json!({
            "checks": selected,
            "rows": report.rows.len(),
            "failures": report.failures().count(),
        });
        w.finish("verify-kernels", &serde_json::json!({ "verify": cfg, "seed": seed }), &summary)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_selection_is_empty_report() {
        let cfg = VerifyConfig { checks: Some(vec![]), ..Default::default() };
        let r = run_verify(&cfg, 0, None).unwrap();
        assert!(r.rows.is_empty() && r.all_pass());
    }

    #[test]
    fn unknown_check_is_config_error() {
        let cfg = VerifyConfig { checks: Some(vec!["nope".into()]), ..Default::default() };
        assert!(matches!(run_verify(&cfg, 0, None), Err(Error::Config(_))));
    }

    #[test]
    fn corrupted_divergence_breaks_adjointness() {
        let g = GridSpec::interval(1.0, 8.0, 128, 2.0).unwrap();
        assert!(adjointness_residual(&g, 10, 1, 0.0) < 1e-12);
        assert!(adjointness_residual(&g, 10, 1, -0.01) > 1e-6);
    }

    #[test]
    fn cheap_checks_pass() {
        let cfg = VerifyConfig {
            checks: Some(vec!["kernel-limits".into(), "laplacian-symbol".into(), "real-output".into()]),
            ..Default::default()
        };
        let r = run_verify(&cfg, 0, None).unwrap();
        assert!(r.all_pass(), "{:?}", r.failures().collect::<Vec<_>>());
    }
}
