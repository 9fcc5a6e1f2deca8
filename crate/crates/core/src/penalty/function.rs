//! Exponential penalty `k_eps` and its energy antiderivative.

use serde::{Deserialize, Serialize};

/// `k_eps(t) = 0` for `t <= 0`, `e^{t/eps} - 1` on `(0, 1/eps]`, `e^{1/eps^2} - 1` beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyFn {
    pub eps: f64,
}

impl PenaltyFn {
    pub fn new(eps: f64) -> Self {
        PenaltyFn { eps }
    }

    pub fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            (t.min(1.0 / self.eps) / self.eps).exp_m1()
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= 1.0 / self.eps {
            0.0
        } else {
            (t / self.eps).exp() / self.eps
        }
    }

    /// `int_0^t k_eps(tau - g) tau dtau`, the penalty part of the energy density of `|p| = t`.
    pub fn energy(&self, t: f64, g: f64) -> f64 {
        let eps = self.eps;
        let big_t = t - g;
        if big_t <= 0.0 {
            return 0.0;
        }
        let cap = 1.0 / eps;
        if big_t <= cap {
            return self.middle_energy(big_t, g);
        }
        let c = (cap / eps).exp_m1();
        self.middle_energy(cap, g) + c * 0.5 * (t * t - (g + cap) * (g + cap))
    }

    /// `int_0^T (e^{tau/eps} - 1)(tau + g) dtau` for `0 < T <= 1/eps`.
    fn middle_energy(&self, big_t: f64, g: f64) -> f64 {
        let eps = self.eps;
        let x = big_t / eps;
        if x < 0.5 {
            // sum_k T^{k+1} / (k! eps^k) (T/(k+2) + g/(k+1))
            let mut acc = 0.0;
            let mut term = big_t; // T^{k+1} / (k! eps^k) at k = 0
            for k in 1..40 {
                term *= x / k as f64;
                let kf = k as f64;
                let add = term * (big_t / (kf + 2.0) + g / (kf + 1.0));
                acc += add;
                if add.abs() <= 1e-17 * acc.abs() {
                    break;
                }
            }
            acc
        } else {
            eps * (big_t + g - eps) * x.exp_m1() + eps * big_t - 0.5 * big_t * big_t - g * big_t
        }
    }
}

/// Flux coefficient `phi(t) = k_eps(t - g) + eps t^{q-2}` and its derivative in `t`.
pub fn flux_coefficient(pen: &PenaltyFn, q: f64, t: f64, g: f64) -> (f64, f64) {
    let eps = pen.eps;
    let reg = if t > 0.0 { eps * t.powf(q - 2.0) } else { 0.0 };
    let dreg = if t > 0.0 { eps * (q - 2.0) * t.powf(q - 3.0) } else { 0.0 };
    (pen.value(t - g) + reg, pen.derivative(t - g) + dreg)
}

/// Energy density `int_0^t phi(tau) tau dtau`.
pub fn energy_density(pen: &PenaltyFn, q: f64, t: f64, g: f64) -> f64 {
    pen.energy(t, g) + pen.eps * t.powf(q) / q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::tanh_sinh;

    #[test]
    fn branches_and_continuity() {
        let p = PenaltyFn::new(0.2);
        assert_eq!(p.value(-1.0), 0.0);
        assert_eq!(p.value(0.0), 0.0);
        let cap = (1.0f64 / 0.04).exp_m1();
        assert!((p.value(5.0) - cap).abs() < 1e-12 * cap);
        assert!((p.value(5.0 - 1e-12) - cap).abs() < 1e-9 * cap);
        assert_eq!(p.value(7.0), cap);
        assert_eq!(p.derivative(7.0), 0.0);
        assert_eq!(p.derivative(-1.0), 0.0);
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let p = PenaltyFn::new(0.1);
        for t in [0.05, 0.3, 0.9] {
            let fd = (p.value(t + 1e-7) - p.value(t - 1e-7)) / 2e-7;
            assert!((fd - p.derivative(t)).abs() < 1e-5 * fd);
        }
    }

    #[test]
    fn energy_matches_quadrature() {
        for eps in [0.3, 0.1, 0.03] {
            let p = PenaltyFn::new(eps);
            let g = 1.0;
            for t in [0.5, 1.0 + 1e-4, 1.0 + 0.3 * eps, 1.0 + 2.0 * eps, 1.0 + 5.0 * eps] {
                let want = if t <= g { 0.0 } else { tanh_sinh(|tau| p.value(tau - g) * tau, g, t, 1e-14) };
                let got = p.energy(t, g);
                assert!((got - want).abs() <= 1e-10 * (1.0 + want.abs()), "eps {eps} t {t}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn energy_past_cap_is_continuous() {
        let p = PenaltyFn::new(0.5);
        let g = 0.3;
        let a = p.energy(g + 2.0 - 1e-9, g);
        let b = p.energy(g + 2.0 + 1e-9, g);
        assert!((a - b).abs() < 1e-6 * a.abs());
    }
}
