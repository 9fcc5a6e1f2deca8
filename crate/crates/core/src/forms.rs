//! The bilinear form `L^s`, the data functional `F`, coercivity diagnostics
//! and threshold replacement.
//!
//! ```text
//! L^s(u, v) = int A D^s u . D^s v + int_Omega d u . D^s v + int_Omega (b . D^s u + c u) v
//! F(v)      = int_Omega f_# v + int f . D^s v
//! ```
//!
//! Terms carrying `D^s` are integrated over the whole box; the others over `Omega`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Region, ScalarField, VectorField};
use crate::riesz::checks::{bump_ensemble, estimate_poincare_constant, estimate_sobolev_constant};
use crate::riesz::SpectralOps;

/// Coefficients of the operator. `a[x]` is the row-major `d x d` matrix at node `x`
/// (only entry 0 is used when `d = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorData {
    pub grid: GridSpec,
    pub a: Vec<[f64; 4]>,
    pub b: VectorField,
    pub dvec: VectorField,
    pub c: ScalarField,
    pub a_star: f64,
}

impl OperatorData {
    /// `A = a0 I` on the whole box, no lower-order terms.
    pub fn isotropic(grid: &GridSpec, a0: f64) -> Result<Self> {
        let op = OperatorData {
            grid: *grid,
            a: vec![[a0, 0.0, 0.0, a0]; grid.len()],
            b: VectorField::zeros(grid),
            dvec: VectorField::zeros(grid),
            c: ScalarField::zeros(grid),
            a_star: a0.max(0.0),
        };
        op.validate()?;
        Ok(op)
    }

    /// Fully degenerate operator `A = 0`.
    pub fn degenerate(grid: &GridSpec) -> Self {
        OperatorData {
            grid: *grid,
            a: vec![[0.0; 4]; grid.len()],
            b: VectorField::zeros(grid),
            dvec: VectorField::zeros(grid),
            c: ScalarField::zeros(grid),
            a_star: 0.0,
        }
    }

    /// Diagonal `A = diag(a(x))` from a scalar field.
    pub fn from_scalar_a(a: &ScalarField, a_star: f64) -> Result<Self> {
        let grid = a.grid;
        let op = OperatorData {
            grid,
            a: a.values.iter().map(|&v| [v, 0.0, 0.0, v]).collect(),
            b: VectorField::zeros(&grid),
            dvec: VectorField::zeros(&grid),
            c: ScalarField::zeros(&grid),
            a_star,
        };
        op.validate()?;
        Ok(op)
    }

    pub fn with_lower_order(mut self, b: VectorField, dvec: VectorField, c: ScalarField) -> Result<Self> {
        self.b = b;
        self.dvec = dvec;
        self.c = c;
        self.validate()?;
        Ok(self)
    }

    /// `A(x)` applied to `xi`.
    pub fn apply_a(&self, x: usize, xi: [f64; 2]) -> [f64; 2] {
        let m = &self.a[x];
        if self.grid.dim == 1 {
            [m[0] * xi[0], 0.0]
        } else {
            [m[0] * xi[0] + m[1] * xi[1], m[2] * xi[0] + m[3] * xi[1]]
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        g.check_same(&self.b.grid)?;
        g.check_same(&self.dvec.grid)?;
        g.check_same(&self.c.grid)?;
        if self.a.len() != g.len() {
            return Err(Error::MaskMismatch { expected: g.len(), got: self.a.len() });
        }
        if !(self.a_star >= 0.0) {
            return Err(Error::InvalidOperator(format!("a_star must be >= 0, got {}", self.a_star)));
        }
        let d = g.dim;
        let inside = g.mask().inside;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for (x, m) in self.a.iter().enumerate() {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidOperator(format!("non-finite A at node {x}")));
            }
            let ok = if d == 1 {
                m[0] >= 0.0
            } else {
                let sym = [m[0], 0.5 * (m[1] + m[2]), m[3]];
                let tr = sym[0] + sym[2];
                let det = sym[0] * sym[2] - sym[1] * sym[1];
                let scale = 1e-12 * (1.0 + tr.abs());
                tr >= -scale && det >= -scale * scale.max(tr.abs())
            };
            let mut sampled = true;
            for _ in 0..4 {
                let xi = [rng.gen_range(-1.0..1.0), if d == 2 { rng.gen_range(-1.0..1.0) } else { 0.0 }];
                let axi = self.apply_a(x, xi);
                if axi[0] * xi[0] + axi[1] * xi[1] < -1e-12 {
                    sampled = false;
                }
            }
            if !ok || !sampled {
                return Err(Error::InvalidOperator(format!("A is not positive semidefinite at node {x}")));
            }
        }
        for (name, field) in [("b", &self.b), ("d", &self.dvec)] {
            for comp in &field.components {
                for (x, v) in comp.iter().enumerate() {
                    if !v.is_finite() || (!inside[x] && *v != 0.0) {
                        return Err(Error::InvalidOperator(format!("{name} must be finite and vanish outside Omega (node {x})")));
                    }
                }
            }
        }
        for (x, v) in self.c.values.iter().enumerate() {
            if !v.is_finite() || (!inside[x] && *v != 0.0) {
                return Err(Error::InvalidOperator(format!("c must be finite and vanish outside Omega (node {x})")));
            }
        }
        Ok(())
    }

    /// `A` is symmetric and `b = d`, so the form is symmetric.
    pub fn is_symmetric(&self) -> bool {
        let sym_a = self.grid.dim == 1 || self.a.iter().all(|m| (m[1] - m[2]).abs() <= 1e-14 * (1.0 + m[1].abs()));
        sym_a && self.b == self.dvec
    }

    /// Symmetric with no first-order terms and `c >= 0`: the energy is convex.
    pub fn is_convex_symmetric(&self) -> bool {
        self.is_symmetric()
            && self.b.components.iter().all(|c| c.iter().all(|&v| v == 0.0))
            && self.c.values.iter().all(|&v| v >= 0.0)
    }

    pub fn is_degenerate(&self) -> bool {
        self.a.iter().all(|m| m.iter().all(|&v| v == 0.0))
    }
}

/// Data `f_#` (on `Omega`) and `f` (on the box).
#[derive(Debug, Clone, PartialEq)]
pub struct SourceData {
    pub f_sharp: ScalarField,
    pub f_vec: VectorField,
}

impl SourceData {
    pub fn new(f_sharp: ScalarField, f_vec: VectorField) -> Result<Self> {
        f_sharp.grid.check_same(&f_vec.grid)?;
        let inside = f_sharp.grid.mask().inside;
        for (x, v) in f_sharp.values.iter().enumerate() {
            if !v.is_finite() || (!inside[x] && *v != 0.0) {
                return Err(Error::InvalidParameter(format!("f_# must be finite and vanish outside Omega (node {x})")));
            }
        }
        if f_vec.components.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("f must be finite".into()));
        }
        Ok(SourceData { f_sharp, f_vec })
    }

    pub fn zero(grid: &GridSpec) -> Self {
        SourceData { f_sharp: ScalarField::zeros(grid), f_vec: VectorField::zeros(grid) }
    }

    /// Constant `f_#` on `Omega`, no vector part.
    pub fn constant(grid: &GridSpec, f: f64) -> Self {
        SourceData { f_sharp: ScalarField::constant(grid, f).masked(), f_vec: VectorField::zeros(grid) }
    }

    pub fn is_zero(&self) -> bool {
        self.f_sharp.values.iter().all(|&v| v == 0.0) && self.f_vec.components.iter().flatten().all(|&v| v == 0.0)
    }
}

/// Threshold `g` with bounds `g_* <= g <= g^*` on the whole box.
#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    pub g: ScalarField,
    pub g_star: f64,
    pub g_upper: f64,
}

impl Threshold {
    pub fn new(g: ScalarField) -> Result<Self> {
        let g_star = g.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let g_upper = g.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(g_star > 0.0) || !g_upper.is_finite() {
            return Err(Error::InvalidThreshold(format!("need 0 < g_* <= g <= g^* < inf, got [{g_star}, {g_upper}]")));
        }
        Ok(Threshold { g, g_star, g_upper })
    }

    pub fn constant(grid: &GridSpec, value: f64) -> Result<Self> {
        Self::new(ScalarField::constant(grid, value))
    }
}

/// `L^s(u, v)` by lattice quadrature.
pub fn bilinear_apply(op: &OperatorData, u: &ScalarField, v: &ScalarField, s: f64) -> Result<f64> {
    op.grid.check_same(&u.grid)?;
    op.grid.check_same(&v.grid)?;
    let ops = SpectralOps::new(&op.grid);
    let du = ops.gradient(u, s);
    let dv = ops.gradient(v, s);
    Ok(bilinear_with_gradients(op, u, v, &du, &dv))
}

pub(crate) fn bilinear_with_gradients(
    op: &OperatorData,
    u: &ScalarField,
    v: &ScalarField,
    du: &VectorField,
    dv: &VectorField,
) -> f64 {
    let grid = &op.grid;
    let d = grid.dim;
    let inside = grid.mask().inside;
    let mut acc = 0.0;
    for x in 0..grid.len() {
        let mut p = [0.0; 2];
        let mut q = [0.0; 2];
        for a in 0..d {
            p[a] = du.components[a][x];
            q[a] = dv.components[a][x];
        }
        let ap = op.apply_a(x, p);
        acc += ap[0] * q[0] + ap[1] * q[1];
        if inside[x] {
            for a in 0..d {
                acc += op.dvec.components[a][x] * u.values[x] * q[a];
                acc += op.b.components[a][x] * p[a] * v.values[x];
            }
            acc += op.c.values[x] * u.values[x] * v.values[x];
        }
    }
    acc * grid.cell_volume()
}

/// `F(v)` by lattice quadrature.
pub fn linear_apply(src: &SourceData, v: &ScalarField, s: f64) -> Result<f64> {
    src.f_sharp.grid.check_same(&v.grid)?;
    let dv = SpectralOps::new(&v.grid).gradient(v, s);
    let inside = v.grid.mask().inside;
    let mut acc = 0.0;
    for x in 0..v.grid.len() {
        if inside[x] {
            acc += src.f_sharp.values[x] * v.values[x];
        }
    }
    acc *= v.grid.cell_volume();
    Ok(acc + src.f_vec.dot(&dv))
}

/// Empirical embedding constants used by the coercivity margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalConstants {
    /// Sobolev constant `||v||_{L^{2^*}} <= C_* ||D^s v||_{L^2}`.
    pub c_star: f64,
    /// Poincaré constant with `||v||_{L^2} <= (C_0/s) ||D^s v||_{L^2}`.
    pub c_zero: f64,
    pub ensemble_size: usize,
    pub seed: u64,
}

/// Estimate `C_*` and `C_0` over a seeded bump ensemble of `count >= 64` members.
pub fn estimate_constants(grid: &GridSpec, s: f64, count: usize, seed: u64) -> Result<EmpiricalConstants> {
    if count < 64 {
        return Err(Error::InvalidParameter(format!("ensemble needs at least 64 members, got {count}")));
    }
    let ens = bump_ensemble(grid, count, seed);
    Ok(EmpiricalConstants {
        c_star: estimate_sobolev_constant(&ens, s)?,
        c_zero: estimate_poincare_constant(&ens, s, 2.0)?,
        ensemble_size: count,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoercivityReport {
    pub delta: f64,
    pub c_star: f64,
    pub c_zero: f64,
    /// `||b + d||` in `L^{d/s}(Omega)` (or `L^1` when that exponent is below 1).
    pub bd_norm: f64,
    pub bd_exponent: f64,
    /// `||c^-||` in `L^{d/2s}(Omega)` (or `L^1`).
    pub c_minus_norm: f64,
    pub c_minus_exponent: f64,
    pub coercive: bool,
}

/// `delta = a_* - C_* (||b + d|| + C_* ||c^-||)`.
pub fn coercivity_margin(op: &OperatorData, s: f64, constants: &EmpiricalConstants) -> Result<CoercivityReport> {
    let grid = &op.grid;
    let d = grid.dim as f64;
    let bd = op.b.axpy(1.0, &op.dvec)?;
    let c_minus = ScalarField { grid: *grid, values: op.c.values.iter().map(|&v| (-v).max(0.0)).collect() };
    let bd_exponent = (d / s).max(1.0);
    let c_minus_exponent = (d / (2.0 * s)).max(1.0);
    let bd_norm = bd.lp_norm(bd_exponent, Region::Omega)?;
    let c_minus_norm = c_minus.lp_norm(c_minus_exponent, Region::Omega)?;
    let delta = op.a_star - constants.c_star * (bd_norm + constants.c_star * c_minus_norm);
    Ok(CoercivityReport {
        delta,
        c_star: constants.c_star,
        c_zero: constants.c_zero,
        bd_norm,
        bd_exponent,
        c_minus_norm,
        c_minus_exponent,
        coercive: delta > 0.0,
    })
}

/// Keep `g` on `Omega_R` and set it to `k` outside, with `k` defaulting to
/// `||g||_{L^inf(Omega_R)}`.
pub fn threshold_replace(g: &ScalarField, k: Option<f64>) -> Result<Threshold> {
    let buffer = g.grid.mask().buffer_inside;
    let mut floor = f64::INFINITY;
    let mut sup: f64 = 0.0;
    for (v, &inside) in g.values.iter().zip(&buffer) {
        if inside {
            floor = floor.min(*v);
            sup = sup.max(*v);
        }
    }
    if !(floor > 0.0) {
        return Err(Error::InvalidThreshold(format!("g must be positive on Omega_R, min is {floor}")));
    }
    let k = k.unwrap_or(sup);
    if k < sup {
        return Err(Error::InvalidThreshold(format!("outer value {k} is below sup g on Omega_R ({sup})")));
    }
    let values = g.values.iter().zip(&buffer).map(|(&v, &inside)| if inside { v } else { k }).collect();
    Threshold::new(ScalarField { grid: g.grid, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Shape;

    fn grid1() -> GridSpec {
        GridSpec::interval(1.0, 8.0, 128, 1.0).unwrap()
    }

    fn random_omega_field(grid: &GridSpec, seed: u64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ScalarField::from_values(grid, values).unwrap().masked()
    }

    #[test]
    fn identity_operator_gives_gradient_norm() {
        let g = grid1();
        let op = OperatorData::isotropic(&g, 1.0).unwrap();
        let u = random_omega_field(&g, 1);
        let du = SpectralOps::new(&g).gradient(&u, 0.6);
        let want = du.dot(&du);
        let got = bilinear_apply(&op, &u, &u, 0.6).unwrap();
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn mass_term_gives_l2_norm() {
        let g = grid1();
        let mut op = OperatorData::degenerate(&g);
        op.c = ScalarField::constant(&g, 1.0).masked();
        let u = random_omega_field(&g, 2);
        let want = u.lp_norm(2.0, Region::Omega).unwrap().powi(2);
        assert!((bilinear_apply(&op, &u, &u, 0.5).unwrap() - want).abs() < 1e-12 * want);
    }

    #[test]
    fn symmetric_when_b_equals_d() {
        let g = GridSpec::new(2, 6.0, 32, Shape::Ball { radius: 1.0 }, 1.0).unwrap();
        let bfield = VectorField::from_components(
            &g,
            vec![ScalarField::from_fn(&g, |x| x[0]).masked().values, ScalarField::from_fn(&g, |x| x[1] * x[1]).masked().values],
        )
        .unwrap();
        let op = OperatorData::isotropic(&g, 1.0)
            .unwrap()
            .with_lower_order(bfield.clone(), bfield, ScalarField::constant(&g, 0.3).masked())
            .unwrap();
        assert!(op.is_symmetric());
        let u = random_omega_field(&g, 3);
        let v = random_omega_field(&g, 4);
        let a = bilinear_apply(&op, &u, &v, 0.7).unwrap();
        let b = bilinear_apply(&op, &v, &u, 0.7).unwrap();
        assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn linear_form_properties() {
        let g = grid1();
        let v1 = random_omega_field(&g, 5);
        let v2 = random_omega_field(&g, 6);
        assert_eq!(linear_apply(&SourceData::zero(&g), &v1, 0.5).unwrap(), 0.0);
        let ops = SpectralOps::new(&g);
        let w = random_omega_field(&g, 7);
        let src = SourceData::new(ScalarField::constant(&g, 2.0).masked(), ops.gradient(&w, 0.5)).unwrap();
        let combo = v1.scale(1.7).axpy(1.0, &v2).unwrap();
        let lhs = linear_apply(&src, &combo, 0.5).unwrap();
        let rhs = 1.7 * linear_apply(&src, &v1, 0.5).unwrap() + linear_apply(&src, &v2, 0.5).unwrap();
        assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
        // f = D^s w: the vector part equals -int w D^s.(D^s v)
        let vec_only = SourceData::new(ScalarField::zeros(&g), ops.gradient(&w, 0.5)).unwrap();
        let div = ops.divergence(&ops.gradient(&v1, 0.5), 0.5);
        let want = -w.dot(&div);
        let got = linear_apply(&vec_only, &v1, 0.5).unwrap();
        assert!((got - want).abs() < 1e-10 * (1.0 + want.abs()));
    }

    #[test]
    fn coercivity_cases() {
        let g = grid1();
        let k = EmpiricalConstants { c_star: 0.8, c_zero: 0.5, ensemble_size: 64, seed: 0 };
        let op = OperatorData::isotropic(&g, 2.0).unwrap();
        let r = coercivity_margin(&op, 0.7, &k).unwrap();
        assert_eq!(r.delta, 2.0);
        assert!(r.coercive);
        let r = coercivity_margin(&OperatorData::degenerate(&g), 0.7, &k).unwrap();
        assert!(r.delta <= 0.0 && !r.coercive);
        // d / 2s < 1 falls back to L^1
        assert_eq!(r.c_minus_exponent, 1.0);
    }

    #[test]
    fn coercivity_witness() {
        let g = grid1();
        let s = 0.7;
        let k = estimate_constants(&g, s, 64, 11).unwrap();
        let mut op = OperatorData::isotropic(&g, 1.0).unwrap();
        op.c = ScalarField::constant(&g, -0.2).masked();
        let r = coercivity_margin(&op, s, &k).unwrap();
        assert!(r.coercive, "{r:?}");
        let ops = SpectralOps::new(&g);
        for v in bump_ensemble(&g, 32, 99) {
            let dv = ops.gradient(&v, s);
            let lhs = bilinear_apply(&op, &v, &v, s).unwrap();
            assert!(lhs >= r.delta * dv.dot(&dv));
        }
    }

    #[test]
    fn threshold_replacement() {
        let g = grid1();
        let grow = ScalarField::from_fn(&g, |x| 1.0 + x[0] * x[0]);
        let t = threshold_replace(&grow, None).unwrap();
        let buffer = g.mask().buffer_inside;
        let sup = grow.values.iter().zip(&buffer).filter(|(_, &b)| b).fold(0.0f64, |m, (v, _)| m.max(*v));
        for (i, &b) in buffer.iter().enumerate() {
            if b {
                assert_eq!(t.g.values[i], grow.values[i]);
            } else {
                assert_eq!(t.g.values[i], sup);
            }
        }
        assert!(t.g_upper <= sup && t.g_star >= 1.0);
        assert!(threshold_replace(&ScalarField::zeros(&g), None).is_err());
        assert!(threshold_replace(&grow, Some(0.5)).is_err());
    }

    #[test]
    fn operator_validation() {
        let g = grid1();
        assert!(OperatorData::isotropic(&g, -1.0).is_err());
        let mut op = OperatorData::degenerate(&g);
        op.c = ScalarField::constant(&g, 1.0);
        assert!(op.validate().is_err());
        assert!(Threshold::constant(&g, 0.0).is_err());
    }
}
