//! Closed-form one-dimensional benchmarks on `Omega = (-1, 1)` with `g = 1`, `s = 1`.
//!
//! Both share the flux `(a0 + lambda) u' = -f x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchmarkKind {
    /// Elastoplastic torsion with ellipticity `a0 > 0`.
    Torsion,
    /// Degenerate transport problem, `a0 = 0`.
    MongeKantorovich,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticBenchmark {
    pub name: &'static str,
    pub kind: BenchmarkKind,
    pub a0: f64,
    pub f: f64,
}

/// Torsion benchmark `-((a0 + lambda) u')' = f`, `|u'| <= 1`.
pub fn analytic_torsion_1d(a0: f64, f: f64) -> Result<AnalyticBenchmark> {
    if !(a0 > 0.0 && a0.is_finite()) || !(f > 0.0 && f.is_finite()) {
        return Err(Error::InvalidParameter(format!("torsion needs a0 > 0 and f > 0, got a0 = {a0}, f = {f}")));
    }
    Ok(AnalyticBenchmark { name: "torsion", kind: BenchmarkKind::Torsion, a0, f })
}

/// Transport benchmark `-(lambda u')' = f`, `|u'| <= 1`.
pub fn analytic_mk_1d(f: f64) -> Result<AnalyticBenchmark> {
    if !(f > 0.0 && f.is_finite()) {
        return Err(Error::InvalidParameter(format!("transport benchmark needs f > 0, got {f}")));
    }
    Ok(AnalyticBenchmark { name: "monge-kantorovich", kind: BenchmarkKind::MongeKantorovich, a0: 0.0, f })
}

impl AnalyticBenchmark {
    /// Edge of the elastic core `|x| < a0/f` (0 for the transport case).
    pub fn elastic_radius(&self) -> f64 {
        (self.a0 / self.f).min(1.0)
    }

    pub fn u(&self, x: f64) -> f64 {
        if x.abs() >= 1.0 {
            return 0.0;
        }
        match self.kind {
            BenchmarkKind::MongeKantorovich => 1.0 - x.abs(),
            BenchmarkKind::Torsion => {
                let xs = self.a0 / self.f;
                if xs >= 1.0 {
                    self.f * (1.0 - x * x) / (2.0 * self.a0)
                } else if x.abs() <= xs {
                    self.f * (xs * xs - x * x) / (2.0 * self.a0) + 1.0 - xs
                } else {
                    1.0 - x.abs()
                }
            }
        }
    }

    pub fn du(&self, x: f64) -> f64 {
        if x.abs() >= 1.0 {
            return 0.0;
        }
        match self.kind {
            BenchmarkKind::MongeKantorovich => -x.signum(),
            BenchmarkKind::Torsion => (-(self.f / self.a0) * x).clamp(-1.0, 1.0),
        }
    }

    pub fn lambda(&self, x: f64) -> f64 {
        if x.abs() >= 1.0 {
            return 0.0;
        }
        match self.kind {
            BenchmarkKind::MongeKantorovich => self.f * x.abs(),
            BenchmarkKind::Torsion => self.f * (x.abs() - self.a0 / self.f).max(0.0),
        }
    }

    /// `(a0 + lambda) u'`.
    pub fn flux(&self, x: f64) -> f64 {
        (self.a0 + self.lambda(x)) * self.du(x)
    }

    /// Nodal samples of `u` and `lambda`.
    pub fn sample(&self, grid: &GridSpec) -> (ScalarField, ScalarField) {
        (
            ScalarField::from_fn(grid, |x| self.u(x[0])).masked(),
            ScalarField::from_fn(grid, |x| self.lambda(x[0])).masked(),
        )
    }
}
