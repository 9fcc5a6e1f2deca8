//! Riesz kernel constants and norms, and two independent discretizations of
//! the fractional gradient `D^s`.
//!
//! The kernel `I_alpha(x) = gamma_{d,alpha} / |x|^{d-alpha}` has normalization
//!
//! ```text
//! gamma_{d,alpha} = Gamma((d - alpha)/2) / (pi^{d/2} 2^alpha Gamma(alpha/2))
//! ```
//!
//! and the singular-integral form of `D^s` carries `mu_s = (d + s - 1) gamma_{d,1-s}`.

pub mod checks;
pub mod direct;
pub mod spectral;

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::gamma;

pub use direct::{frac_gradient_direct, KernelSum};
pub use spectral::{
    frac_divergence_spectral, frac_gradient_spectral, riesz_convolve, RieszSymbol, SpectralOps,
};

/// Fractional exponent `s` with the lower bound `sigma` used in localization sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracOrder {
    pub s: f64,
    pub sigma: f64,
}

impl FracOrder {
    pub fn new(s: f64, sigma: f64) -> Result<Self> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::InvalidOrder(s));
        }
        if !(sigma > 0.0 && sigma < s) {
            return Err(Error::InvalidParameter(format!("sigma must satisfy 0 < sigma < s, got sigma = {sigma}, s = {s}")));
        }
        Ok(FracOrder { s, sigma })
    }

    /// Order with `sigma = s / 2`.
    pub fn with_default_sigma(s: f64) -> Result<Self> {
        Self::new(s, 0.5 * s)
    }

    pub fn is_local(&self) -> bool {
        self.s == 1.0
    }

    pub fn mu(&self, d: usize) -> f64 {
        mu(d, self.s)
    }
}

/// Surface area of the unit sphere in `R^d` (`sigma_{d-1}`).
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

/// Riesz kernel normalization `gamma_{d,alpha}`, for `0 < alpha < d`.
pub fn riesz_gamma(d: usize, alpha: f64) -> f64 {
    let d = d as f64;
    gamma((d - alpha) / 2.0) / (PI.powf(d / 2.0) * 2f64.powf(alpha) * gamma(alpha / 2.0))
}

/// `mu_s = (d + s - 1) gamma_{d,1-s}`; zero at `s = 1`.
pub fn mu(d: usize, s: f64) -> f64 {
    if s >= 1.0 {
        return 0.0;
    }
    (d as f64 + s - 1.0) * riesz_gamma(d, 1.0 - s)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("kernel order must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// `||I_alpha||_{L^1(B(0,R))} = sigma_{d-1} gamma_{d,alpha} R^alpha / alpha`.
pub fn kernel_norm_ball(d: usize, alpha: f64, radius: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    Ok(sphere_area(d) * riesz_gamma(d, alpha) * radius.powf(alpha) / alpha)
}

/// `||I_alpha||_{L^{p'}(R^d \ B(0,R))}`, requiring `alpha p < d` and `p > 1`.
pub fn kernel_norm_tail(d: usize, alpha: f64, p: f64, radius: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let df = d as f64;
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("tail norm needs 1 < p < inf, got {p}")));
    }
    if alpha * p >= df {
        return Err(Error::InvalidParameter(format!("tail norm needs alpha p < d, got {}", alpha * p)));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    let p_conj = p / (p - 1.0);
    let base = sphere_area(d) * (p - 1.0) / (df - alpha * p);
    Ok(riesz_gamma(d, alpha) * base.powf(1.0 / p_conj) * radius.powf((alpha * p - df) / p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_and_mu() {
        assert!((riesz_gamma(1, 0.5) - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-14);
        for d in [1, 2] {
            for a in [0.1, 0.5, 0.9] {
                assert!(riesz_gamma(d, a) > 0.0);
            }
            assert!(mu(d, 0.999) < mu(d, 0.9));
            assert_eq!(mu(d, 1.0), 0.0);
        }
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn frac_order_validation() {
        assert!(FracOrder::new(0.0, 0.1).is_err());
        assert!(FracOrder::new(1.2, 0.1).is_err());
        assert!(FracOrder::new(0.5, 0.5).is_err());
        let o = FracOrder::new(1.0, 0.5).unwrap();
        assert!(o.is_local());
    }

    #[test]
    fn ball_norm_closed_form() {
        let v = kernel_norm_ball(1, 0.5, 1.0).unwrap();
        assert!((v - 4.0 / (2.0 * PI).sqrt()).abs() < 1e-13);
        for d in [1, 2] {
            let a = kernel_norm_ball(d, 0.3, 1.7).unwrap();
            let b = kernel_norm_ball(d, 0.3, 3.4).unwrap();
            assert!((b / a - 2f64.powf(0.3)).abs() < 1e-13);
        }
        assert!(kernel_norm_ball(1, 1.0, 1.0).is_err());
        assert!(kernel_norm_ball(1, 0.0, 1.0).is_err());
    }

    #[test]
    fn alpha_to_zero_limits() {
        for d in [1, 2] {
            let ball: Vec<f64> = [0.4, 0.2, 0.1, 0.05, 1e-4]
                .iter()
                .map(|&a| kernel_norm_ball(d, a, 1.0).unwrap())
                .collect();
            assert!((ball[4] - 1.0).abs() < 1e-3);
            let tail: Vec<f64> = [0.4, 0.2, 0.1, 0.05, 1e-4]
                .iter()
                .map(|&a| kernel_norm_tail(d, a, 2.0, 1.0).unwrap())
                .collect();
            assert!(tail[4] < 1e-3);
            for w in tail.windows(2) {
                assert!(w[1] < w[0]);
            }
        }
    }

    #[test]
    fn tail_norm_decreases_in_radius() {
        let a = kernel_norm_tail(2, 0.4, 3.0, 1.0).unwrap();
        let b = kernel_norm_tail(2, 0.4, 3.0, 2.0).unwrap();
        assert!(b < a);
        assert!(kernel_norm_tail(1, 0.6, 2.0, 1.0).is_err());
    }
}
