//! Optimality diagnostics of a penalized solution.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::problem::DiscreteProblem;
use super::solver::Solution;

/// Fixed test fields on the `Omega` unknowns: 32 seeded random fields and
/// eight low-frequency sine modes.
#[derive(Debug, Clone)]
pub struct TestBattery {
    pub fields: Vec<DVector<f64>>,
}

impl TestBattery {
    pub fn new(problem: &DiscreteProblem, seed: u64) -> Self {
        let m = problem.unknowns();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6b6b_7400);
        let mut fields: Vec<DVector<f64>> = (0..32).map(|_| DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0))).collect();
        let ext = problem.grid.omega.extent();
        let dim = problem.grid.dim;
        for k in 1..=8usize {
            let (ka, kb) = if dim == 1 { (k, 0) } else { (1 + (k - 1) / 3, (k - 1) % 3 + 1) };
            fields.push(DVector::from_iterator(
                m,
                problem.omega.iter().map(|&x| {
                    let p = problem.grid.position(x);
                    let mode = |kk: usize, c: f64| (kk as f64 * PI * (c + ext) / (2.0 * ext)).sin();
                    if dim == 1 { mode(ka, p[0]) } else { mode(ka, p[0]) * mode(kb, p[1]) }
                }),
            ));
        }
        TestBattery { fields }
    }
}

/// Complementarity and equation diagnostics. All entries are nonnegative
/// except `complementarity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub eps: f64,
    /// `max (|D^s u| - g)^+`.
    pub violation_sup: f64,
    /// `<lambda, |D^s u| - g>`.
    pub complementarity: f64,
    /// Worst `|L^s(u,v) + <lambda D^s u, D^s v> - F(v)| / |v|` over the battery,
    /// with `|v|` the Euclidean norm of the nodal values.
    pub equation_residual: f64,
    /// Same with the regularization flux `eps |D^s u|^{q-2} D^s u` included.
    pub penalized_residual: f64,
    /// Measure of `{|D^s u| - g > sqrt(eps)}`.
    pub v_measure: f64,
    pub k_l1: f64,
    pub psi_l1: f64,
    /// `<lambda, 1{|D^s u| < g - sqrt(eps)}>`.
    pub inactive_mass: f64,
    /// `<lambda, |D^s u|^2> / <lambda, g^2>`; 1 when `lambda` vanishes.
    pub energy_identity_ratio: f64,
    /// `||D^s u||_{L^r}`.
    pub grad_lr: f64,
    pub lambda_min: f64,
}

pub fn kkt_report(problem: &DiscreteProblem, sol: &Solution, battery: &TestBattery, r: f64) -> KktReport {
    let hd = problem.grid.cell_volume();
    let u = sol.coefficients();
    let grad = problem.gradient(u);
    let mags = problem.magnitudes(&grad);
    let lam = &sol.lambda.values;
    let g = &problem.g;
    let root = sol.eps.sqrt();

    let mut violation_sup: f64 = 0.0;
    let (mut comp, mut v_measure, mut k_l1, mut psi_l1, mut inactive, mut num, mut den, mut lr) =
        (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    let mut lambda_min = f64::INFINITY;
    for x in 0..mags.len() {
        let t = mags[x];
        violation_sup = violation_sup.max(t - g[x]);
        comp += lam[x] * (t - g[x]);
        if t - g[x] > root {
            v_measure += 1.0;
        }
        if t < g[x] - root {
            inactive += lam[x];
        }
        k_l1 += lam[x].abs();
        psi_l1 += lam[x].abs() * t;
        num += lam[x] * t * t;
        den += lam[x] * g[x] * g[x];
        lr += t.powf(r);
        lambda_min = lambda_min.min(lam[x]);
    }

    let base = &problem.k_lin * u - &problem.rhs;
    let lambda_part = problem.weighted_divergence(&grad, lam);
    let reg: Vec<f64> = mags.iter().map(|&t| if t > 0.0 { sol.eps * t.powf(sol.q - 2.0) } else { 0.0 }).collect();
    let reg_part = problem.weighted_divergence(&grad, &reg);
    let eq = &base + &lambda_part;
    let pen = &eq + &reg_part;
    let worst = |res: &DVector<f64>| {
        battery
            .fields
            .iter()
            .map(|v| {
                let nv = v.norm();
                if nv > 0.0 { res.dot(v).abs() / nv } else { 0.0 }
            })
            .fold(0.0f64, f64::max)
    };

    KktReport {
        eps: sol.eps,
        violation_sup: violation_sup.max(0.0),
        complementarity: comp * hd,
        equation_residual: worst(&eq),
        penalized_residual: worst(&pen),
        v_measure: v_measure * hd,
        k_l1: k_l1 * hd,
        psi_l1: psi_l1 * hd,
        inactive_mass: inactive * hd,
        energy_identity_ratio: if den > 0.0 { num / den } else { 1.0 },
        grad_lr: (lr * hd).powf(1.0 / r),
        lambda_min,
    }
}
