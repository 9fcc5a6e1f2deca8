//! Dense discretization on the `Omega` unknowns.
//!
//! `D` maps the `m` interior values to the `d N` gradient samples on the box.
//! Its columns are lattice translates of `D^s` applied to a unit impulse, so
//! the spectral path fixes every entry.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::forms::{OperatorData, SourceData, Threshold};
use crate::grid::{GridSpec, ScalarField, VectorField};
use crate::riesz::SpectralOps;

use super::function::{energy_density, flux_coefficient, PenaltyFn};

#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    pub grid: GridSpec,
    pub s: f64,
    /// Flat indices of the unknowns.
    pub omega: Vec<usize>,
    /// `(d N) x m`, component-major rows.
    pub dmat: DMatrix<f64>,
    /// Matrix of `L^s` on the nodal basis: `k_lin[(j, i)] = L^s(e_i, e_j)`.
    pub k_lin: DMatrix<f64>,
    /// `F(e_j)`.
    pub rhs: DVector<f64>,
    pub g: Vec<f64>,
    pub symmetric: bool,
    pub convex: bool,
    dtd: DMatrix<f64>,
}

impl DiscreteProblem {
    pub fn new(op: &OperatorData, src: &SourceData, thr: &Threshold, s: f64) -> Result<Self> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::InvalidOrder(s));
        }
        let grid = op.grid;
        grid.check_same(&src.f_sharp.grid)?;
        grid.check_same(&thr.g.grid)?;
        op.validate()?;
        let n_nodes = grid.len();
        let d = grid.dim;
        let omega = grid.mask().omega_indices();
        let m = omega.len();
        if m == 0 {
            return Err(Error::EmptyRegion);
        }
        let hd = grid.cell_volume();

        let ops = SpectralOps::new(&grid);
        let mut impulse = ScalarField::zeros(&grid);
        impulse.values[0] = 1.0;
        let kernel = ops.gradient(&impulse, s);
        let n = grid.points_per_axis;
        let mut dmat = DMatrix::zeros(d * n_nodes, m);
        for (col, &j) in omega.iter().enumerate() {
            let jm = grid.multi_index(j);
            for x in 0..n_nodes {
                let xm = grid.multi_index(x);
                let off = grid.flat_index([(xm[0] + n - jm[0]) % n, (xm[1] + n - jm[1]) % n]);
                for a in 0..d {
                    dmat[(a * n_nodes + x, col)] = kernel.components[a][off];
                }
            }
        }

        let block = |a: usize| dmat.rows(a * n_nodes, n_nodes);
        let mut k_lin = DMatrix::zeros(m, m);
        for a in 0..d {
            for b in 0..d {
                let idx = a * 2 + b;
                let weights: Vec<f64> = op.a.iter().map(|mat| hd * mat[idx]).collect();
                if weights.iter().all(|&w| w == 0.0) {
                    continue;
                }
                let mut scaled = block(b).into_owned();
                for (x, w) in weights.iter().enumerate() {
                    scaled.row_mut(x).scale_mut(*w);
                }
                k_lin.gemm_tr(1.0, &block(a), &scaled, 1.0);
            }
        }
        for (col_i, &xi) in omega.iter().enumerate() {
            for a in 0..d {
                let dv = op.dvec.components[a][xi];
                let bv = op.b.components[a][xi];
                for col_j in 0..m {
                    // d(x_i) . D e_j(x_i) and b(x_j) . D e_i(x_j)
                    if dv != 0.0 {
                        k_lin[(col_j, col_i)] += hd * dv * dmat[(a * n_nodes + xi, col_j)];
                    }
                    if bv != 0.0 {
                        k_lin[(col_i, col_j)] += hd * bv * dmat[(a * n_nodes + xi, col_j)];
                    }
                }
            }
            k_lin[(col_i, col_i)] += hd * op.c.values[xi];
        }

        let mut rhs = DVector::zeros(m);
        let mut fvec = DVector::zeros(d * n_nodes);
        for a in 0..d {
            for x in 0..n_nodes {
                fvec[a * n_nodes + x] = src.f_vec.components[a][x];
            }
        }
        rhs.gemv_tr(hd, &dmat, &fvec, 0.0);
        for (col, &x) in omega.iter().enumerate() {
            rhs[col] += hd * src.f_sharp.values[x];
        }

        let mut dtd = DMatrix::zeros(m, m);
        dtd.gemm_tr(hd, &dmat, &dmat, 0.0);

        Ok(DiscreteProblem {
            grid,
            s,
            omega,
            dmat,
            k_lin,
            rhs,
            g: thr.g.values.clone(),
            symmetric: op.is_symmetric(),
            convex: op.is_convex_symmetric(),
            dtd,
        })
    }

    pub fn unknowns(&self) -> usize {
        self.omega.len()
    }

    pub fn nodes(&self) -> usize {
        self.grid.len()
    }

    /// `h^d D^T D`.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.dtd
    }

    pub fn restrict(&self, u: &ScalarField) -> DVector<f64> {
        DVector::from_iterator(self.omega.len(), self.omega.iter().map(|&x| u.values[x]))
    }

    pub fn extend(&self, u: &DVector<f64>) -> ScalarField {
        let mut f = ScalarField::zeros(&self.grid);
        for (col, &x) in self.omega.iter().enumerate() {
            f.values[x] = u[col];
        }
        f
    }

    pub fn gradient(&self, u: &DVector<f64>) -> DVector<f64> {
        &self.dmat * u
    }

    pub fn gradient_field(&self, grad: &DVector<f64>) -> VectorField {
        let n = self.nodes();
        VectorField {
            grid: self.grid,
            components: (0..self.grid.dim).map(|a| grad.rows(a * n, n).iter().cloned().collect()).collect(),
        }
    }

    /// `|D^s u|` at every node.
    pub fn magnitudes(&self, grad: &DVector<f64>) -> Vec<f64> {
        let n = self.nodes();
        let d = self.grid.dim;
        (0..n)
            .map(|x| (0..d).map(|a| grad[a * n + x].powi(2)).sum::<f64>().sqrt())
            .collect()
    }

    /// `h^d D^T (w D u)` for nodewise scalar weights.
    pub fn weighted_divergence(&self, grad: &DVector<f64>, weights: &[f64]) -> DVector<f64> {
        let n = self.nodes();
        let hd = self.grid.cell_volume();
        let mut flux = grad.clone();
        for a in 0..self.grid.dim {
            for x in 0..n {
                flux[a * n + x] *= hd * weights[x];
            }
        }
        self.dmat.tr_mul(&flux)
    }

    fn flux_weights(&self, mags: &[f64], pen: &PenaltyFn, q: f64) -> Result<Vec<f64>> {
        mags.iter()
            .zip(&self.g)
            .map(|(&t, &g)| {
                let (phi, _) = flux_coefficient(pen, q, t, g);
                if phi.is_finite() {
                    Ok(phi)
                } else {
                    Err(Error::PenaltyOverflow { eps: pen.eps })
                }
            })
            .collect()
    }

    /// Weak residual `K u + h^d D^T(phi(|Du|) Du) - F` on the nodal basis.
    pub fn residual(&self, u: &DVector<f64>, pen: &PenaltyFn, q: f64) -> Result<DVector<f64>> {
        let grad = self.gradient(u);
        let w = self.flux_weights(&self.magnitudes(&grad), pen, q)?;
        Ok(&self.k_lin * u + self.weighted_divergence(&grad, &w) - &self.rhs)
    }

    /// Discrete energy `1/2 u^T K u - F^T u + h^d sum Phi(|Du|)`; meaningful when `K` is symmetric.
    pub fn energy(&self, u: &DVector<f64>, pen: &PenaltyFn, q: f64) -> f64 {
        let grad = self.gradient(u);
        let mags = self.magnitudes(&grad);
        let hd = self.grid.cell_volume();
        let nonlinear: f64 = mags.iter().zip(&self.g).map(|(&t, &g)| energy_density(pen, q, t, g)).sum::<f64>() * hd;
        0.5 * u.dot(&(&self.k_lin * u)) - self.rhs.dot(u) + nonlinear
    }

    /// Newton matrix with the Levenberg shift `shift h^d D^T D`.
    pub fn jacobian(&self, u: &DVector<f64>, pen: &PenaltyFn, q: f64, shift: f64) -> Result<DMatrix<f64>> {
        let n = self.nodes();
        let d = self.grid.dim;
        let hd = self.grid.cell_volume();
        let grad = self.gradient(u);
        let mags = self.magnitudes(&grad);
        let mut jac = self.k_lin.clone();
        // M = phi I + (phi'/t) p p^T per node
        let mut weights = vec![vec![0.0; n]; d * d];
        for x in 0..n {
            let t = mags[x];
            let (phi, dphi) = flux_coefficient(pen, q, t, self.g[x]);
            if !phi.is_finite() || !dphi.is_finite() {
                return Err(Error::PenaltyOverflow { eps: pen.eps });
            }
            let ratio = if t > 0.0 { dphi / t } else { 0.0 };
            for a in 0..d {
                for b in 0..d {
                    let pa = grad[a * n + x];
                    let pb = grad[b * n + x];
                    let diag = if a == b { phi } else { 0.0 };
                    weights[a * d + b][x] = hd * (diag + ratio * pa * pb);
                }
            }
        }
        for a in 0..d {
            for b in 0..d {
                let mut scaled = self.dmat.rows(b * n, n).into_owned();
                for (x, w) in weights[a * d + b].iter().enumerate() {
                    scaled.row_mut(x).scale_mut(*w);
                }
                jac.gemm_tr(1.0, &self.dmat.rows(a * n, n), &scaled, 1.0);
            }
        }
        if shift > 0.0 {
            jac += &self.dtd * shift;
        }
        Ok(jac)
    }

    /// Matrix of the frozen-coefficient linearization `K + h^d D^T diag(phi) D`.
    pub fn picard_matrix(&self, u: &DVector<f64>, pen: &PenaltyFn, q: f64, shift: f64) -> Result<DMatrix<f64>> {
        let n = self.nodes();
        let grad = self.gradient(u);
        let w = self.flux_weights(&self.magnitudes(&grad), pen, q)?;
        let hd = self.grid.cell_volume();
        let mut jac = self.k_lin.clone();
        for a in 0..self.grid.dim {
            let mut scaled = self.dmat.rows(a * n, n).into_owned();
            for (x, wx) in w.iter().enumerate() {
                scaled.row_mut(x).scale_mut(hd * (wx + shift));
            }
            jac.gemm_tr(1.0, &self.dmat.rows(a * n, n), &scaled, 1.0);
        }
        Ok(jac)
    }

    /// Solve of the unconstrained linear problem `K u = F`.
    pub fn linear_solve(&self) -> Result<DVector<f64>> {
        solve_dense(self.k_lin.clone(), &self.rhs, self.symmetric)
    }
}

/// Cholesky when symmetric positive definite, LU otherwise.
pub(crate) fn solve_dense(mat: DMatrix<f64>, rhs: &DVector<f64>, try_cholesky: bool) -> Result<DVector<f64>> {
    if try_cholesky {
        if let Some(ch) = Cholesky::new(mat.clone()) {
            return Ok(ch.solve(rhs));
        }
    }
    mat.lu().solve(rhs).ok_or_else(|| Error::LinearSolve("singular matrix".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::bilinear_apply;
    use crate::forms::linear_apply;
    use crate::grid::Shape;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(s: f64) -> (OperatorData, SourceData, Threshold) {
        let g = GridSpec::interval(1.0, 8.0, 64, 1.0).unwrap();
        let inside = g.mask().inside;
        let bfield = VectorField::from_components(
            &g,
            vec![g.positions().iter().zip(&inside).map(|(x, &i)| if i { 0.3 * x[0] } else { 0.0 }).collect()],
        )
        .unwrap();
        let op = OperatorData::isotropic(&g, 1.3)
            .unwrap()
            .with_lower_order(bfield, VectorField::zeros(&g), ScalarField::constant(&g, 0.4).masked())
            .unwrap();
        let ops = SpectralOps::new(&g);
        let w = ScalarField::from_fn(&g, |x| (1.0 - x[0] * x[0]).max(0.0)).masked();
        let src = SourceData::new(ScalarField::constant(&g, 2.0).masked(), ops.gradient(&w, s)).unwrap();
        (op, src, Threshold::constant(&g, 1.0).unwrap())
    }

    #[test]
    fn matrix_matches_forms() {
        let s = 0.7;
        let (op, src, thr) = setup(s);
        let p = DiscreteProblem::new(&op, &src, &thr, s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = p.unknowns();
        let u = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
        let v = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
        let want = bilinear_apply(&op, &p.extend(&u), &p.extend(&v), s).unwrap();
        let got = v.dot(&(&p.k_lin * &u));
        assert!((want - got).abs() < 1e-10 * (1.0 + want.abs()), "{want} {got}");
        let fv = linear_apply(&src, &p.extend(&v), s).unwrap();
        assert!((fv - p.rhs.dot(&v)).abs() < 1e-10 * (1.0 + fv.abs()));
    }

    #[test]
    fn residual_is_energy_gradient() {
        let g = GridSpec::new(2, 6.0, 16, Shape::Ball { radius: 1.0 }, 1.0).unwrap();
        let op = OperatorData::isotropic(&g, 1.0).unwrap();
        let src = SourceData::constant(&g, 3.0);
        let thr = Threshold::constant(&g, 0.5).unwrap();
        let p = DiscreteProblem::new(&op, &src, &thr, 0.6).unwrap();
        let pen = PenaltyFn::new(0.2);
        let q = 5.0;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = p.unknowns();
        let u = DVector::from_fn(m, |_, _| rng.gen_range(0.0..1.0));
        let dir = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
        let r = p.residual(&u, &pen, q).unwrap();
        let step = 1e-5;
        let fd = (p.energy(&(&u + &dir * step), &pen, q) - p.energy(&(&u - &dir * step), &pen, q)) / (2.0 * step);
        let an = r.dot(&dir);
        assert!((fd - an).abs() < 1e-6 * an.abs(), "{fd} {an}");
        // Jacobian against residual differences
        let jac = p.jacobian(&u, &pen, q, 0.0).unwrap();
        let jd = &jac * &dir;
        let rd = (p.residual(&(&u + &dir * step), &pen, q).unwrap() - p.residual(&(&u - &dir * step), &pen, q).unwrap()) / (2.0 * step);
        let scale = 1.0 + rd.norm();
        assert!((jd - rd).norm() < 1e-5 * scale);
    }

    #[test]
    fn zero_state_has_zero_residual_without_data() {
        let g = GridSpec::interval(1.0, 8.0, 32, 1.0).unwrap();
        let op = OperatorData::isotropic(&g, 1.0).unwrap();
        let p = DiscreteProblem::new(&op, &SourceData::zero(&g), &Threshold::constant(&g, 1.0).unwrap(), 0.5).unwrap();
        let r = p.residual(&DVector::zeros(p.unknowns()), &PenaltyFn::new(0.1), 4.0).unwrap();
        assert_eq!(r.norm(), 0.0);
    }
}
