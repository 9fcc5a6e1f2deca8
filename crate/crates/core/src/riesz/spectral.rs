//! Fourier-multiplier discretization of the Riesz potential, the fractional
//! gradient and the fractional divergence on the periodic box.
//!
//! With angular wavenumber `w = 2 pi k`, the multipliers are
//!
//! ```text
//! I_alpha      |w|^{-alpha}
//! D^s_j        i w_j |w|^{s-1}
//! D^s . D^s    -|w|^{2s}
//! ```
//!
//! The zero mode is dropped for every multiplier. Gradient symbols vanish on the
//! Nyquist plane of their own axis so that real fields map to real fields.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::{GridSpec, ScalarField, VectorField};

/// Per-axis imaginary parts of the fractional gradient symbol.
#[derive(Debug, Clone)]
pub struct RieszSymbol {
    pub s: f64,
    /// `components[a][k]` is `Im m_a(k)`; the real part is zero.
    pub components: Vec<Vec<f64>>,
    /// `|w(k)|` per lattice frequency.
    pub modulus: Vec<f64>,
}

impl RieszSymbol {
    pub fn value(&self, axis: usize, k: usize) -> Complex64 {
        Complex64::new(0.0, self.components[axis][k])
    }

    /// `|m(k)|`, equal to `|w|^s` away from Nyquist planes.
    pub fn magnitude(&self, k: usize) -> f64 {
        self.components.iter().map(|c| c[k] * c[k]).sum::<f64>().sqrt()
    }
}

/// FFT plans and wavenumbers for one grid.
#[derive(Clone)]
pub struct SpectralOps {
    grid: GridSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Angular wavenumber per index along one axis.
    wavenumbers: Vec<f64>,
}

impl std::fmt::Debug for SpectralOps {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralOps").field("grid", &self.grid).finish()
    }
}

impl SpectralOps {
    pub fn new(grid: &GridSpec) -> Self {
        let n = grid.points_per_axis;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let l = grid.box_side;
        let wavenumbers = (0..n)
            .map(|i| {
                let k = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
                2.0 * std::f64::consts::PI * k / l
            })
            .collect();
        SpectralOps { grid: *grid, forward, inverse, wavenumbers }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.points_per_axis;
        if self.grid.dim == 1 {
            plan.process(data);
            return;
        }
        // rows
        for row in data.chunks_mut(n) {
            plan.process(row);
        }
        // columns
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = data[i * n + j];
            }
            plan.process(&mut col);
            for i in 0..n {
                data[i * n + j] = col[i];
            }
        }
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.forward);
        data
    }

    /// Inverse transform, normalized, returning the real part.
    pub fn inverse_real(&self, mut data: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut data, &self.inverse);
        let scale = 1.0 / self.grid.len() as f64;
        data.iter().map(|c| c.re * scale).collect()
    }

    /// Inverse transform keeping the imaginary residue (for realness checks).
    pub fn inverse_complex(&self, mut data: Vec<Complex64>) -> Vec<Complex64> {
        self.transform(&mut data, &self.inverse);
        let scale = 1.0 / self.grid.len() as f64;
        data.iter().map(|c| c * scale).collect()
    }

    /// Angular wavenumber vector of flat frequency index `k`.
    pub fn wavevector(&self, k: usize) -> [f64; 2] {
        let m = self.grid.multi_index(k);
        let mut w = [0.0; 2];
        for (a, wa) in w.iter_mut().enumerate().take(self.grid.dim) {
            *wa = self.wavenumbers[m[a]];
        }
        w
    }

    fn is_nyquist(&self, k: usize, axis: usize) -> bool {
        self.grid.multi_index(k)[axis] == self.grid.points_per_axis / 2
    }

    pub fn symbol(&self, s: f64) -> RieszSymbol {
        let len = self.grid.len();
        let d = self.grid.dim;
        let mut components = vec![vec![0.0; len]; d];
        let mut modulus = vec![0.0; len];
        for k in 0..len {
            let w = self.wavevector(k);
            let r = w[..d].iter().map(|v| v * v).sum::<f64>().sqrt();
            modulus[k] = r;
            if r == 0.0 {
                continue;
            }
            let scale = if s == 1.0 { 1.0 } else { r.powf(s - 1.0) };
            for (a, comp) in components.iter_mut().enumerate() {
                if !self.is_nyquist(k, a) {
                    comp[k] = w[a] * scale;
                }
            }
        }
        RieszSymbol { s, components, modulus }
    }

    pub fn gradient_with(&self, sym: &RieszSymbol, u: &[f64]) -> Vec<Vec<f64>> {
        let uh = self.forward(u);
        sym.components
            .iter()
            .map(|c| {
                let prod: Vec<Complex64> =
                    uh.iter().zip(c).map(|(z, m)| z * Complex64::new(0.0, *m)).collect();
                self.inverse_real(prod)
            })
            .collect()
    }

    pub fn divergence_with(&self, sym: &RieszSymbol, xi: &[Vec<f64>]) -> Vec<f64> {
        let len = self.grid.len();
        let mut acc = vec![Complex64::new(0.0, 0.0); len];
        for (c, comp) in sym.components.iter().zip(xi) {
            let xh = self.forward(comp);
            for k in 0..len {
                acc[k] += xh[k] * Complex64::new(0.0, c[k]);
            }
        }
        self.inverse_real(acc)
    }

    /// `D^s u`; `s = 1` is the spectral classical gradient.
    pub fn gradient(&self, u: &ScalarField, s: f64) -> VectorField {
        let sym = self.symbol(s);
        VectorField { grid: self.grid, components: self.gradient_with(&sym, &u.values) }
    }

    /// `D^s . xi`, the negative adjoint of [`SpectralOps::gradient`].
    pub fn divergence(&self, xi: &VectorField, s: f64) -> ScalarField {
        let sym = self.symbol(s);
        ScalarField { grid: self.grid, values: self.divergence_with(&sym, &xi.components) }
    }

    /// Apply a real radial multiplier `m(|w|)` (zero mode forced to 0).
    pub fn radial_multiplier(&self, f: &[f64], m: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut fh = self.forward(f);
        for (k, z) in fh.iter_mut().enumerate() {
            let w = self.wavevector(k);
            let r = w[..self.grid.dim].iter().map(|v| v * v).sum::<f64>().sqrt();
            *z *= if r == 0.0 { 0.0 } else { m(r) };
        }
        self.inverse_real(fh)
    }

    /// Riesz potential `I_alpha * f`.
    pub fn riesz_potential(&self, f: &ScalarField, alpha: f64) -> ScalarField {
        ScalarField { grid: self.grid, values: self.radial_multiplier(&f.values, |r| r.powf(-alpha)) }
    }

    /// Direct multiplier `-|w|^{2s}`.
    pub fn fractional_laplacian(&self, u: &ScalarField, s: f64) -> ScalarField {
        ScalarField { grid: self.grid, values: self.radial_multiplier(&u.values, |r| -r.powf(2.0 * s)) }
    }
}

/// `I_alpha * f` by spectral convolution.
pub fn riesz_convolve(f: &ScalarField, alpha: f64) -> ScalarField {
    SpectralOps::new(&f.grid).riesz_potential(f, alpha)
}

/// Spectral fractional gradient.
pub fn frac_gradient_spectral(u: &ScalarField, s: f64) -> VectorField {
    SpectralOps::new(&u.grid).gradient(u, s)
}

/// Spectral fractional divergence.
pub fn frac_divergence_spectral(xi: &VectorField, s: f64) -> ScalarField {
    SpectralOps::new(&xi.grid).divergence(xi, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, Shape};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g1(n: usize) -> GridSpec {
        GridSpec::interval(1.0, 8.0, n, 1.0).unwrap()
    }

    #[test]
    fn zero_in_zero_out() {
        let g = g1(64);
        let ops = SpectralOps::new(&g);
        let z = ScalarField::zeros(&g);
        assert!(ops.gradient(&z, 0.6).components[0].iter().all(|&v| v == 0.0));
        assert!(ops.divergence(&VectorField::zeros(&g), 0.6).values.iter().all(|&v| v == 0.0));
        assert!(ops.riesz_potential(&z, 0.3).values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn classical_derivative_of_sine() {
        let g = g1(128);
        let l = g.box_side;
        let tau = 2.0 * std::f64::consts::PI / l;
        let u = ScalarField::from_fn(&g, |x| (tau * x[0]).sin());
        let du = frac_gradient_spectral(&u, 1.0);
        for i in 0..g.len() {
            let x = g.coordinate(i);
            assert!((du.components[0][i] - tau * (tau * x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn plane_wave_eigenrelation() {
        let g = g1(64);
        let l = g.box_side;
        let k = 3.0;
        let w = 2.0 * std::f64::consts::PI * k / l;
        let u = ScalarField::from_fn(&g, |x| (w * x[0]).cos());
        let alpha = 0.35;
        let iu = riesz_convolve(&u, alpha);
        for i in 0..g.len() {
            assert!((iu.values[i] - w.powf(-alpha) * u.values[i]).abs() < 1e-12);
        }
        let s = 0.6;
        let lap = SpectralOps::new(&g).fractional_laplacian(&u, s);
        let dd = frac_divergence_spectral(&frac_gradient_spectral(&u, s), s);
        for i in 0..g.len() {
            assert!((lap.values[i] + w.powf(2.0 * s) * u.values[i]).abs() < 1e-11);
            assert!((dd.values[i] - lap.values[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn symbol_oddness_and_modulus() {
        let g = GridSpec::new(2, 8.0, 16, Shape::Ball { radius: 1.0 }, 1.0).unwrap();
        let ops = SpectralOps::new(&g);
        let s = 0.4;
        let sym = ops.symbol(s);
        let n = g.points_per_axis;
        for k in 0..g.len() {
            let [i, j] = g.multi_index(k);
            let neg = g.flat_index([(n - i) % n, (n - j) % n]);
            for a in 0..2 {
                let m = sym.value(a, k);
                let mn = sym.value(a, neg);
                assert!((mn - m.conj()).norm() < 1e-13 * (1.0 + m.norm()));
                assert!((mn + m).norm() < 1e-13 * (1.0 + m.norm()));
            }
            if i != n / 2 && j != n / 2 && k != 0 {
                let r = sym.modulus[k];
                assert!((sym.magnitude(k) - r.powf(s)).abs() < 1e-12 * r.powf(s));
            }
        }
    }

    #[test]
    fn real_input_gives_real_output() {
        let g = GridSpec::new(2, 8.0, 32, Shape::Ball { radius: 1.0 }, 1.0).unwrap();
        let ops = SpectralOps::new(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sym = ops.symbol(0.3);
        let uh = ops.forward(&u);
        for c in &sym.components {
            let prod: Vec<Complex64> = uh.iter().zip(c).map(|(z, m)| z * Complex64::new(0.0, *m)).collect();
            let back = ops.inverse_complex(prod);
            let imag = back.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            let real = back.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
            assert!(imag <= 1e-12 * real.max(1.0));
        }
    }

    #[test]
    fn adjointness_on_random_fields() {
        let g = GridSpec::new(2, 8.0, 32, Shape::Ball { radius: 1.0 }, 1.0).unwrap();
        let ops = SpectralOps::new(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = ScalarField::from_values(&g, (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let xi = VectorField::from_components(
            &g,
            (0..2).map(|_| (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect(),
        )
        .unwrap();
        let s = 0.55;
        let lhs = u.dot(&ops.divergence(&xi, s));
        let rhs = ops.gradient(&u, s).dot(&xi);
        let scale = u.lp_norm(2.0, crate::grid::Region::Full).unwrap()
            * xi.lp_norm(2.0, crate::grid::Region::Full).unwrap();
        assert!((lhs + rhs).abs() <= 1e-12 * scale);
    }
}
