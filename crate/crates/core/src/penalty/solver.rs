//! Damped Newton for a fixed `eps` and warm-started continuation.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::forms::{OperatorData, SourceData, Threshold};
use crate::grid::{ScalarField, VectorField};

use super::function::PenaltyFn;
use super::kkt::{kkt_report, KktReport, TestBattery};
use super::problem::{solve_dense, DiscreteProblem};
use super::SolverConfig;

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: ScalarField,
    pub grad: VectorField,
    /// `k_eps(|D^s u| - g)` on the whole box.
    pub lambda: ScalarField,
    /// `lambda D^s u`.
    pub psi: VectorField,
    pub eps: f64,
    pub q: f64,
    pub iterations: usize,
    pub residual_norm: f64,
    /// `1 + ||F||`, the scale of the stopping test.
    pub residual_scale: f64,
    pub converged: bool,
    pub energy_history: Vec<f64>,
    pub residual_history: Vec<f64>,
    pub(crate) coeffs: DVector<f64>,
}

impl Solution {
    /// Interior nodal values.
    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coeffs
    }
}

/// One continuation stage.
#[derive(Debug, Clone)]
pub struct Stage {
    pub eps: f64,
    pub solution: Solution,
    pub kkt: KktReport,
}

fn finish(problem: &DiscreteProblem, u: DVector<f64>, pen: &PenaltyFn) -> (ScalarField, VectorField, ScalarField, VectorField) {
    let grad = problem.gradient(&u);
    let mags = problem.magnitudes(&grad);
    let lambda: Vec<f64> = mags.iter().zip(&problem.g).map(|(&t, &g)| pen.value(t - g)).collect();
    let grad_field = problem.gradient_field(&grad);
    let psi = grad_field.weighted(&lambda);
    (problem.extend(&u), grad_field, ScalarField { grid: problem.grid, values: lambda }, psi)
}

impl DiscreteProblem {
    /// Solve the penalized equation at `eps`, optionally warm started.
    pub fn solve(&self, eps: f64, cfg: &SolverConfig, warm: Option<&DVector<f64>>) -> Result<Solution> {
        let d = self.grid.dim;
        let q = cfg.q_for(d, self.s);
        SolverConfig { eps, ..cfg.clone() }.validate(d, self.s)?;
        let pen = PenaltyFn::new(eps);
        let m = self.unknowns();
        let mut u = match warm {
            Some(w) if w.len() == m => w.clone(),
            Some(w) => return Err(Error::MaskMismatch { expected: m, got: w.len() }),
            None => DVector::zeros(m),
        };
        let scale = 1.0 + self.rhs.norm();
        let tol = cfg.newton_tol * scale;
        let mut energy_history = Vec::new();
        let mut residual_history = Vec::new();
        let use_energy = self.convex;

        if !self.symmetric {
            for _ in 0..cfg.picard_iters {
                let mat = self.picard_matrix(&u, &pen, q, cfg.levenberg)?;
                let next = solve_dense(mat, &self.rhs, false)?;
                let r = self.residual(&next, &pen, q);
                match r {
                    Ok(r) if r.norm() < self.residual(&u, &pen, q)?.norm() => u = next,
                    _ => break,
                }
            }
        }

        let mut r = self.residual(&u, &pen, q)?;
        let mut rn = r.norm();
        let mut converged = rn <= tol;
        let mut iterations = 0;
        residual_history.push(rn);
        if use_energy {
            energy_history.push(self.energy(&u, &pen, q));
        }
        while !converged && iterations < cfg.max_iters {
            iterations += 1;
            let jac = self.jacobian(&u, &pen, q, cfg.levenberg)?;
            let du = solve_dense(jac, &(-&r), self.symmetric)?;
            let slope = r.dot(&du);
            let merit0 = if use_energy { *energy_history.last().unwrap() } else { 0.5 * rn * rn };
            let merit_slope = if use_energy { slope } else { -rn * rn };
            let mut step = 1.0;
            let mut accepted = None;
            while step >= cfg.min_step {
                let trial = &u + &du * step;
                let value = if use_energy {
                    self.energy(&trial, &pen, q)
                } else {
                    match self.residual(&trial, &pen, q) {
                        Ok(rt) => 0.5 * rt.norm_squared(),
                        Err(_) => f64::INFINITY,
                    }
                };
                if value.is_finite() && value <= merit0 + cfg.armijo * step * merit_slope.min(0.0) {
                    accepted = Some((trial, value));
                    break;
                }
                // near the solution energy differences sink below roundoff
                if use_energy && value.is_finite() && value <= merit0 + 1e-13 * merit0.abs().max(1.0) {
                    if let Ok(rt) = self.residual(&trial, &pen, q) {
                        if rt.norm() <= (1.0 - cfg.armijo * step) * rn {
                            accepted = Some((trial, value));
                            break;
                        }
                    }
                }
                step *= 0.5;
            }
            let Some((trial, value)) = accepted else {
                // roundoff floor: no representable decrease left
                converged = rn <= 1e3 * tol;
                break;
            };
            let rt = self.residual(&trial, &pen, q)?;
            u = trial;
            r = rt;
            rn = r.norm();
            residual_history.push(rn);
            if use_energy {
                energy_history.push(value);
            }
            converged = rn <= tol;
        }
        let coeffs = u.clone();
        let (uf, grad, lambda, psi) = finish(self, u, &pen);
        Ok(Solution {
            u: uf,
            grad,
            lambda,
            psi,
            eps,
            q,
            iterations,
            residual_norm: rn,
            residual_scale: scale,
            converged,
            energy_history,
            residual_history,
            coeffs,
        })
    }

    /// Warm-started solves along `cfg.eps_schedule`; fails if a stage does not converge.
    pub fn continuation(&self, cfg: &SolverConfig, battery: &TestBattery) -> Result<Vec<Stage>> {
        if cfg.eps_schedule.is_empty() {
            return Err(Error::InvalidParameter("eps_schedule is empty".into()));
        }
        cfg.validate(self.grid.dim, self.s)?;
        let mut stages: Vec<Stage> = Vec::with_capacity(cfg.eps_schedule.len());
        for &eps in &cfg.eps_schedule {
            let warm = stages.last().map(|st| st.solution.coeffs.clone());
            let sol = self.solve(eps, cfg, warm.as_ref())?;
            if !sol.converged {
                return Err(Error::NotConverged { iterations: sol.iterations, residual: sol.residual_norm });
            }
            let kkt = kkt_report(self, &sol, battery, cfg.r_for(self.grid.dim, self.s));
            stages.push(Stage { eps, solution: sol, kkt });
        }
        Ok(stages)
    }
}

/// Build the discrete problem and solve at `cfg.eps`.
pub fn solve_fixed_eps(
    op: &OperatorData,
    src: &SourceData,
    thr: &Threshold,
    s: f64,
    cfg: &SolverConfig,
    warm: Option<&ScalarField>,
) -> Result<Solution> {
    let problem = DiscreteProblem::new(op, src, thr, s)?;
    let warm = warm.map(|w| problem.restrict(w));
    problem.solve(cfg.eps, cfg, warm.as_ref())
}

/// Build the discrete problem and run the continuation schedule.
pub fn continuation_solve(
    op: &OperatorData,
    src: &SourceData,
    thr: &Threshold,
    s: f64,
    cfg: &SolverConfig,
) -> Result<Vec<Stage>> {
    let problem = DiscreteProblem::new(op, src, thr, s)?;
    let battery = TestBattery::new(&problem, cfg.seed);
    problem.continuation(cfg, &battery)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn torsion(n: usize, s: f64) -> DiscreteProblem {
        let g = GridSpec::interval(1.0, 8.0, n, 2.0).unwrap();
        DiscreteProblem::new(
            &OperatorData::isotropic(&g, 1.0).unwrap(),
            &SourceData::constant(&g, 2.0),
            &Threshold::constant(&g, 1.0).unwrap(),
            s,
        )
        .unwrap()
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let g = GridSpec::interval(1.0, 8.0, 64, 2.0).unwrap();
        let sol = solve_fixed_eps(
            &OperatorData::isotropic(&g, 1.0).unwrap(),
            &SourceData::zero(&g),
            &Threshold::constant(&g, 1.0).unwrap(),
            0.7,
            &SolverConfig::default(),
            None,
        )
        .unwrap();
        assert!(sol.converged);
        assert_eq!(sol.u.max_abs(), 0.0);
        assert_eq!(sol.lambda.max_abs(), 0.0);
    }

    #[test]
    fn energy_never_increases() {
        let p = torsion(64, 0.8);
        let sol = p.solve(0.05, &SolverConfig::default(), None).unwrap();
        assert!(sol.converged);
        // nonincreasing up to the roundoff of an O(1) energy
        for w in sol.energy_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-13 * w[0].abs().max(1.0));
        }
        assert!(sol.lambda.values.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn single_stage_schedule_matches_fixed_solve() {
        let p = torsion(64, 1.0);
        let cfg = SolverConfig { eps_schedule: vec![0.1], ..Default::default() };
        let battery = TestBattery::new(&p, 0);
        let stages = p.continuation(&cfg, &battery).unwrap();
        let direct = p.solve(0.1, &cfg, None).unwrap();
        assert_eq!(stages.len(), 1);
        assert!((stages[0].solution.coeffs.clone() - direct.coeffs).norm() < 1e-12);
    }

    #[test]
    fn nonsymmetric_case_converges() {
        let g = GridSpec::interval(1.0, 8.0, 64, 2.0).unwrap();
        let inside = g.mask().inside;
        let b = VectorField::from_components(&g, vec![inside.iter().map(|&i| if i { 0.4 } else { 0.0 }).collect()]).unwrap();
        let op = OperatorData::isotropic(&g, 1.0)
            .unwrap()
            .with_lower_order(b, VectorField::zeros(&g), ScalarField::zeros(&g))
            .unwrap();
        let p = DiscreteProblem::new(&op, &SourceData::constant(&g, 2.0), &Threshold::constant(&g, 1.0).unwrap(), 0.8).unwrap();
        assert!(!p.symmetric);
        let sol = p.solve(0.03, &SolverConfig::default(), None).unwrap();
        assert!(sol.converged, "{}", sol.residual_norm);
    }
}
