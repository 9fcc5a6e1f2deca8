//! Randomized invariants of the penalty, the fractional operators and the
//! discrete problem.

use proptest::prelude::*;

use fracmk::forms::{OperatorData, SourceData, Threshold};
use fracmk::grid::{GridSpec, ScalarField, VectorField};
use fracmk::penalty::{energy_density, flux_coefficient, DiscreteProblem, PenaltyFn, SolverConfig};
use fracmk::riesz::SpectralOps;

fn grid() -> GridSpec {
    GridSpec::interval(1.0, 8.0, 64, 2.0).unwrap()
}

proptest! {
    #[test]
    fn penalty_is_nonnegative_and_nondecreasing(eps in 1e-3..0.5f64, a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let k = PenaltyFn::new(eps);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(k.value(lo) >= 0.0);
        prop_assert!(k.value(lo) <= k.value(hi));
        prop_assert!(k.derivative(lo) >= 0.0);
    }

    #[test]
    fn flux_is_monotone(eps in 1e-3..0.3f64, q in 1.5..4.0f64, g in 0.2..2.0f64, a in 1e-3..3.0f64, b in 1e-3..3.0f64) {
        let k = PenaltyFn::new(eps);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let flux = |t: f64| t * flux_coefficient(&k, q, t, g).0;
        prop_assert!(flux(lo) <= flux(hi) * (1.0 + 1e-12));
        // The energy density is a primitive of the flux, so it increases too.
        prop_assert!(energy_density(&k, q, lo, g) <= energy_density(&k, q, hi, g) * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn gradient_and_divergence_are_adjoint(s in 0.05..=1.0f64, seed in 0u64..1000) {
        let g = grid();
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let u = ScalarField::from_values(&g, (0..g.len()).map(|_| next()).collect()).unwrap();
        let xi = VectorField::from_components(&g, vec![(0..g.len()).map(|_| next()).collect()]).unwrap();
        let ops = SpectralOps::new(&g);
        let lhs = u.dot(&ops.divergence(&xi, s));
        let rhs = ops.gradient(&u, s).dot(&xi);
        prop_assert!((lhs + rhs).abs() <= 1e-12 * u.dot(&u).sqrt() * xi.dot(&xi).sqrt());
    }

    #[test]
    fn gradient_commutes_with_translation(s in 0.1..=1.0f64, shift in 1usize..63) {
        let g = grid();
        let ops = SpectralOps::new(&g);
        let u = ScalarField::from_fn(&g, |x| (-(x[0] * x[0]) * 4.0).exp());
        let moved = ScalarField::from_values(&g, (0..g.len()).map(|i| u.values[(i + g.len() - shift) % g.len()]).collect()).unwrap();
        let du = ops.gradient(&u, s).components[0].clone();
        let dm = ops.gradient(&moved, s).components[0].clone();
        for i in 0..g.len() {
            prop_assert!((dm[i] - du[(i + g.len() - shift) % g.len()]).abs() < 1e-12);
        }
    }

    #[test]
    fn penalty_solution_respects_threshold_scaling(f in 0.5..4.0f64, s in prop::sample::select(vec![0.6, 0.8, 1.0])) {
        let g = grid();
        let op = OperatorData::isotropic(&g, 1.0).unwrap();
        let p = DiscreteProblem::new(&op, &SourceData::constant(&g, f), &Threshold::constant(&g, 1.0).unwrap(), s).unwrap();
        let cfg = SolverConfig { eps_schedule: vec![0.1, 0.03, 0.01], ..SolverConfig::default() };
        let stages = p.continuation(&cfg, &fracmk::penalty::TestBattery::new(&p, 0)).unwrap();
        let last = &stages.last().unwrap().solution;
        prop_assert!(last.converged);
        prop_assert!(last.lambda.values.iter().all(|&l| l >= 0.0));
        // At eps = 0.01 the overshoot of the constraint is already small.
        prop_assert!(stages.last().unwrap().kkt.violation_sup <= 0.1);
    }
}
