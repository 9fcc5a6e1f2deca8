//! Numerical checks of the kernel identities and embedding estimates, plus
//! the random bump ensemble used to estimate the constants `C_0`, `C_*` and
//! `C_{p,q}` empirically.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Region, ScalarField, Shape};
use crate::quadrature::tanh_sinh_with_distances;

use super::direct::{frac_gradient_direct, KernelSum};
use super::spectral::SpectralOps;
use super::{mu, riesz_gamma, sphere_area};

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    sphere_area(d) / d as f64
}

/// Ball norm of `I_alpha` by radial quadrature.
pub fn kernel_norm_ball_quadrature(d: usize, alpha: f64, radius: f64) -> f64 {
    let g = riesz_gamma(d, alpha);
    sphere_area(d) * g * tanh_sinh_with_distances(|_, r, _| r.powf(alpha - 1.0), 0.0, radius, 1e-12)
}

/// Tail norm of `I_alpha` in `L^{p'}` by quadrature after the substitution `r = R / t`.
pub fn kernel_norm_tail_quadrature(d: usize, alpha: f64, p: f64, radius: f64) -> f64 {
    let df = d as f64;
    let pc = p / (p - 1.0);
    let g = riesz_gamma(d, alpha);
    let expo = (df - alpha) * pc - df - 1.0;
    let integral = tanh_sinh_with_distances(|_, t, _| t.powf(expo), 0.0, 1.0, 1e-13);
    let value = sphere_area(d) * g.powf(pc) * radius.powf((alpha - df) * pc + df) * integral;
    value.powf(1.0 / pc)
}

/// Sup over the box of `|D^s w - D w|` for each `s`, both by the spectral path.
pub fn localization_error(w: &ScalarField, s_list: &[f64]) -> Result<Vec<f64>> {
    let ops = SpectralOps::new(&w.grid);
    let local = ops.gradient(w, 1.0);
    s_list
        .iter()
        .map(|&s| {
            if !(s > 0.0 && s <= 1.0) {
                return Err(Error::InvalidOrder(s));
            }
            let ds = ops.gradient(w, s);
            Ok(ds.axpy(-1.0, &local)?.max_abs())
        })
        .collect()
}

/// Worst ratio `|D^s u(x)| d(x,Omega)^{d+s} / (mu_s ||u||_{L^1})` over nodes outside the closure of `Omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarFieldReport {
    pub max_ratio: f64,
    pub nodes: usize,
}

pub fn far_field_check(u: &ScalarField, s: f64) -> Result<FarFieldReport> {
    let grid = &u.grid;
    let h = grid.spacing();
    let outside: Vec<bool> = (0..grid.len()).map(|i| grid.distance_to_omega(i) > 0.5 * h).collect();
    let ds = frac_gradient_direct(u, s, &outside, KernelSum::FreeSpace)?;
    let mag = ds.magnitude();
    let l1 = u.lp_norm(1.0, Region::Full)?;
    let bound = mu(grid.dim, s) * l1;
    let d = grid.dim as f64;
    let mut max_ratio: f64 = 0.0;
    let mut nodes = 0;
    for i in (0..grid.len()).filter(|&i| outside[i]) {
        nodes += 1;
        let scaled = mag.values[i] * grid.distance_to_omega(i).powf(d + s);
        if bound > 0.0 {
            max_ratio = max_ratio.max(scaled / bound);
        } else if scaled > 0.0 {
            max_ratio = f64::INFINITY;
        }
    }
    Ok(FarFieldReport { max_ratio, nodes })
}

/// Sup of `|D^s u|` at nodes at distance at least `radius` from `Omega`, with its bound `mu_s ||u||_1 / R^{d+s}`.
pub fn sup_outside(u: &ScalarField, s: f64, radius: f64) -> Result<(f64, f64)> {
    let grid = &u.grid;
    let eval: Vec<bool> = (0..grid.len()).map(|i| grid.distance_to_omega(i) >= radius).collect();
    let ds = frac_gradient_direct(u, s, &eval, KernelSum::FreeSpace)?;
    let sup = ds.magnitude().values.iter().zip(&eval).filter(|(_, &e)| e).fold(0.0f64, |m, (v, _)| m.max(*v));
    let bound = mu(grid.dim, s) * u.lp_norm(1.0, Region::Full)? / radius.powf(grid.dim as f64 + s);
    Ok((sup, bound))
}

/// One radius of the tail-decay check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRow {
    pub radius: f64,
    /// `int_{box \ Omega_R} |D^s u|^p`.
    pub tail: f64,
    /// `tail R^{(p-1)d+ps} / (mu_s ||u||_1)^p`.
    pub normalized: f64,
    /// Explicit bound on `normalized` valid for `R >= 1`.
    pub constant: f64,
}

/// Explicit constant `omega_d (1 + diam/2)^d (1 + d/e)` with `e = (p-1)d + ps`.
pub fn tail_constant(d: usize, p: f64, s: f64, diameter: f64) -> f64 {
    let df = d as f64;
    let e = (p - 1.0) * df + p * s;
    unit_ball_volume(d) * (1.0 + diameter / 2.0).powf(df) * (1.0 + df / e)
}

pub fn tail_decay_check(u: &ScalarField, s: f64, p: f64, radii: &[f64]) -> Result<Vec<TailRow>> {
    let grid = &u.grid;
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("tail exponent must be finite and >= 1, got {p}")));
    }
    for &r in radii {
        if !(r > 0.0) || grid.omega.extent() + r >= grid.box_side / 2.0 {
            return Err(Error::InvalidParameter(format!("radius {r} does not fit in the box")));
        }
    }
    let rmin = radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let eval: Vec<bool> = (0..grid.len()).map(|i| grid.distance_to_omega(i) >= rmin).collect();
    let mag = frac_gradient_direct(u, s, &eval, KernelSum::FreeSpace)?.magnitude();
    let hd = grid.cell_volume();
    let d = grid.dim as f64;
    let scale = (mu(grid.dim, s) * u.lp_norm(1.0, Region::Full)?).powf(p);
    let constant = tail_constant(grid.dim, p, s, grid.omega.diameter());
    Ok(radii
        .iter()
        .map(|&r| {
            let tail: f64 = (0..grid.len())
                .filter(|&i| grid.distance_to_omega(i) >= r)
                .map(|i| mag.values[i].powf(p))
                .sum::<f64>()
                * hd;
            let normalized = if scale > 0.0 { tail * r.powf((p - 1.0) * d + p * s) / scale } else { 0.0 };
            TailRow { radius: r, tail, normalized, constant }
        })
        .collect())
}

/// `||u||_{L^p(Omega)} / ||D^s u||_{L^p(box)}`, with `0/0` read as 0.
pub fn poincare_ratio(u: &ScalarField, s: f64, p: f64) -> Result<f64> {
    let ops = SpectralOps::new(&u.grid);
    poincare_ratio_with(&ops, u, s, p)
}

fn poincare_ratio_with(ops: &SpectralOps, u: &ScalarField, s: f64, p: f64) -> Result<f64> {
    let num = u.lp_norm(p, Region::Omega)?;
    let den = ops.gradient(u, s).lp_norm(p, Region::Full)?;
    if num == 0.0 {
        return Ok(0.0);
    }
    if den == 0.0 {
        return Err(Error::Discretization(format!("D^s u vanishes for nonzero u (s = {s})")));
    }
    Ok(num / den)
}

/// Random fields supported in `Omega`: three quarters smooth bumps (sums of
/// one to three `exp(1 - 1/(1 - r^2))` profiles), one quarter tents.
pub fn bump_ensemble(grid: &GridSpec, count: usize, seed: u64) -> Vec<ScalarField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = grid.dim;
    (0..count)
        .map(|k| {
            let tent = k % 4 == 3;
            let pieces = if tent { 1 } else { rng.gen_range(1..=3) };
            let mut params = Vec::with_capacity(pieces);
            for _ in 0..pieces {
                let (c, r) = random_ball_in(&grid.omega, dim, &mut rng);
                let amp = rng.gen_range(0.5..1.5) * if rng.gen_bool(0.8) { 1.0 } else { -1.0 };
                params.push((c, r, amp));
            }
            let f = ScalarField::from_fn(grid, |x| {
                params
                    .iter()
                    .map(|(c, r, amp)| {
                        let mut d2 = 0.0;
                        for a in 0..dim {
                            d2 += (x[a] - c[a]).powi(2);
                        }
                        let t = d2.sqrt() / r;
                        if t >= 1.0 {
                            0.0
                        } else if tent {
                            amp * (1.0 - t)
                        } else {
                            amp * (1.0 - 1.0 / (1.0 - t * t)).exp()
                        }
                    })
                    .sum()
            });
            f.masked()
        })
        .collect()
}

fn random_ball_in(shape: &Shape, dim: usize, rng: &mut ChaCha8Rng) -> ([f64; 2], f64) {
    loop {
        let mut c = [0.0; 2];
        for ca in c.iter_mut().take(dim) {
            *ca = rng.gen_range(-1.0..1.0) * shape.extent();
        }
        if !shape.contains(&c[..dim], 0.0) {
            continue;
        }
        let room = inner_distance(shape, &c[..dim]);
        if room < 0.1 * shape.extent() {
            continue;
        }
        let r = rng.gen_range(0.3..1.0) * room;
        return (c, r);
    }
}

/// Distance from an interior point to the boundary.
fn inner_distance(shape: &Shape, x: &[f64]) -> f64 {
    match *shape {
        Shape::Interval { half_width } => half_width - x[0].abs(),
        Shape::Rectangle { half_widths } => (half_widths[0] - x[0].abs()).min(half_widths[1] - x[1].abs()),
        Shape::Ball { radius } => radius - x.iter().map(|v| v * v).sum::<f64>().sqrt(),
    }
}

/// Empirical `C_0`: largest `s ||v||_{L^p(Omega)} / ||D^s v||_{L^p}` over the ensemble.
pub fn estimate_poincare_constant(ensemble: &[ScalarField], s: f64, p: f64) -> Result<f64> {
    let Some(first) = ensemble.first() else {
        return Err(Error::InvalidParameter("empty ensemble".into()));
    };
    let ops = SpectralOps::new(&first.grid);
    let mut best: f64 = 0.0;
    for v in ensemble {
        best = best.max(s * poincare_ratio_with(&ops, v, s, p)?);
    }
    Ok(best)
}

/// Sobolev exponent `2^* = 2d/(d - 2s)`, infinite when `2s >= d`.
pub fn sobolev_exponent(d: usize, s: f64) -> f64 {
    let df = d as f64;
    if 2.0 * s >= df { f64::INFINITY } else { 2.0 * df / (df - 2.0 * s) }
}

/// Empirical `C_*`: largest `||v||_{L^{2^*}(Omega)} / ||D^s v||_{L^2}` over the ensemble.
pub fn estimate_sobolev_constant(ensemble: &[ScalarField], s: f64) -> Result<f64> {
    let Some(first) = ensemble.first() else {
        return Err(Error::InvalidParameter("empty ensemble".into()));
    };
    let ops = SpectralOps::new(&first.grid);
    let q = sobolev_exponent(first.grid.dim, s);
    let mut best: f64 = 0.0;
    for v in ensemble {
        let num = v.lp_norm(q, Region::Omega)?;
        let den = ops.gradient(v, s).lp_norm(2.0, Region::Full)?;
        if num > 0.0 && den > 0.0 {
            best = best.max(num / den);
        }
    }
    Ok(best)
}

/// Empirical `C_{p,q}`: largest `||D^s v||_{L^p} / ||D^s v||_{L^q}` over the ensemble.
pub fn estimate_norm_comparison(ensemble: &[ScalarField], s: f64, p: f64, q: f64) -> Result<f64> {
    let Some(first) = ensemble.first() else {
        return Err(Error::InvalidParameter("empty ensemble".into()));
    };
    let ops = SpectralOps::new(&first.grid);
    let mut best: f64 = 0.0;
    for v in ensemble {
        let g = ops.gradient(v, s);
        let a = g.lp_norm(p, Region::Full)?;
        let b = g.lp_norm(q, Region::Full)?;
        if b > 0.0 {
            best = best.max(a / b);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riesz::{kernel_norm_ball, kernel_norm_tail};

    fn bump_field(grid: &GridSpec) -> ScalarField {
        ScalarField::from_fn(grid, |x| {
            let r2: f64 = x[..grid.dim].iter().map(|v| v * v).sum();
            if r2 < 1.0 { (-1.0 / (1.0 - r2)).exp() } else { 0.0 }
        })
        .masked()
    }

    #[test]
    fn kernel_norm_quadrature_oracles() {
        for d in [1, 2] {
            let a = kernel_norm_ball(d, 0.5, 1.3).unwrap();
            let b = kernel_norm_ball_quadrature(d, 0.5, 1.3);
            assert!((a - b).abs() < 1e-9 * a);
        }
        let a = kernel_norm_tail(1, 0.25, 2.0, 1.0).unwrap();
        let b = kernel_norm_tail_quadrature(1, 0.25, 2.0, 1.0);
        assert!((a - b).abs() < 1e-6 * a, "{a} {b}");
        let a = kernel_norm_tail(2, 0.4, 3.0, 2.0).unwrap();
        let b = kernel_norm_tail_quadrature(2, 0.4, 3.0, 2.0);
        assert!((a - b).abs() < 1e-6 * a, "{a} {b}");
    }

    #[test]
    fn localization_trend() {
        let g = GridSpec::interval(1.0, 8.0, 512, 2.0).unwrap();
        let w = bump_field(&g);
        let e = localization_error(&w, &[0.7, 0.9, 0.99, 1.0]).unwrap();
        assert!(e[0] > e[1] && e[1] > e[2]);
        assert_eq!(e[3], 0.0);
    }

    #[test]
    fn far_field_bound_holds() {
        let g = GridSpec::interval(1.0, 8.0, 256, 2.0).unwrap();
        let u = bump_field(&g);
        for s in [0.3, 0.6, 0.9] {
            let r = far_field_check(&u, s).unwrap();
            assert!(r.nodes > 0 && r.max_ratio <= 1.0, "{s}: {}", r.max_ratio);
        }
    }

    #[test]
    fn tail_rows() {
        let g = GridSpec::interval(1.0, 8.0, 256, 2.5).unwrap();
        let zero = ScalarField::zeros(&g);
        for row in tail_decay_check(&zero, 0.5, 2.0, &[1.0, 2.0]).unwrap() {
            assert_eq!(row.tail, 0.0);
        }
        let u = bump_field(&g);
        let rows = tail_decay_check(&u, 0.5, 2.0, &[1.0, 1.5, 2.0]).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].tail < w[0].tail);
        }
        for r in &rows {
            assert!(r.normalized <= r.constant);
        }
        assert!(tail_decay_check(&u, 0.5, 2.0, &[3.5]).is_err());
    }

    #[test]
    fn poincare_conventions() {
        let g = GridSpec::interval(1.0, 8.0, 128, 2.0).unwrap();
        assert_eq!(poincare_ratio(&ScalarField::zeros(&g), 0.5, 2.0).unwrap(), 0.0);
        let u = bump_field(&g);
        assert!(poincare_ratio(&u, 0.5, 2.0).unwrap() > 0.0);
    }

    #[test]
    fn ensemble_is_supported_in_omega_and_reproducible() {
        let g = GridSpec::new(2, 6.0, 32, Shape::Ball { radius: 1.0 }, 1.0).unwrap();
        let a = bump_ensemble(&g, 8, 7);
        let b = bump_ensemble(&g, 8, 7);
        assert_eq!(a, b);
        let inside = g.mask().inside;
        for f in &a {
            for (v, &m) in f.values.iter().zip(&inside) {
                assert!(m || *v == 0.0);
            }
        }
    }
}
