//! Special functions: Gamma (from `statrs`), Hurwitz and Riemann zeta,
//! Dirichlet beta, and the lattice sums used by the singular-cell correction.

pub use statrs::function::gamma::gamma;

// B_{2j} / (2j)!
const BERNOULLI_OVER_FACTORIAL: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
    -174611.0 / 802857662698291200000.0,
];

/// Hurwitz zeta `zeta(sigma, q) = sum_{k>=0} (q + k)^{-sigma}` (analytically
/// continued), for real `sigma != 1` and `q > 0`, by Euler–Maclaurin summation.
pub fn hurwitz_zeta(sigma: f64, q: f64) -> f64 {
    assert!(q > 0.0, "hurwitz_zeta requires q > 0");
    assert!((sigma - 1.0).abs() > 1e-14, "pole at sigma = 1");
    const N: usize = 24;
    let mut sum = 0.0;
    for k in 0..N {
        sum += (q + k as f64).powf(-sigma);
    }
    let a = q + N as f64;
    sum += a.powf(1.0 - sigma) / (sigma - 1.0) + 0.5 * a.powf(-sigma);
    // rising factorial sigma (sigma+1) ... (sigma+2j-2)
    let mut rising = sigma;
    let mut apow = a.powf(-sigma - 1.0);
    for (j, b) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let term = b * rising * apow;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        let m = 2.0 * j as f64 + sigma;
        rising *= (m + 1.0) * (m + 2.0);
        apow /= a * a;
    }
    sum
}

/// Riemann zeta for real `s != 1`.
pub fn riemann_zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0)
}

/// Dirichlet beta `sum_{k>=0} (-1)^k (2k+1)^{-s}`.
pub fn dirichlet_beta(s: f64) -> f64 {
    4f64.powf(-s) * (hurwitz_zeta(s, 0.25) - hurwitz_zeta(s, 0.75))
}

/// Analytically continued lattice sum `sum_{j in Z^d, j != 0} |j|^{-sigma}`.
///
/// `d = 1` gives `2 zeta(sigma)`; `d = 2` uses the factorization
/// `4 zeta(sigma/2) beta(sigma/2)` of the square-lattice Epstein zeta.
pub fn lattice_zeta(d: usize, sigma: f64) -> f64 {
    match d {
        1 => 2.0 * riemann_zeta(sigma),
        2 => 4.0 * riemann_zeta(sigma / 2.0) * dirichlet_beta(sigma / 2.0),
        _ => panic!("lattice_zeta supports d = 1, 2"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riemann_reference_values() {
        assert!((riemann_zeta(2.0) - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-14);
        assert!((riemann_zeta(0.5) + 1.460_354_508_809_586_8).abs() < 1e-12);
        assert!((riemann_zeta(0.0) + 0.5).abs() < 1e-12);
        assert!((riemann_zeta(-1.0) + 1.0 / 12.0).abs() < 1e-12);
        assert!((riemann_zeta(3.0) - 1.202_056_903_159_594_2).abs() < 1e-14);
    }

    #[test]
    fn dirichlet_beta_reference_values() {
        // Catalan's constant
        assert!((dirichlet_beta(2.0) - 0.915_965_594_177_219_0).abs() < 1e-13);
        assert!((dirichlet_beta(0.5) - 0.667_691_457_189_609_2).abs() < 1e-12);
    }

    #[test]
    fn hurwitz_matches_direct_sum_when_convergent() {
        let (s, q) = (3.5, 0.3);
        let direct: f64 = (0..200_000).rev().map(|k| (q + k as f64).powf(-s)).sum();
        assert!((hurwitz_zeta(s, q) - direct).abs() < 1e-13 * direct);
    }

    const HZ_A: f64 = 6.915_889_214_640_360;
    const HZ_B: f64 = -0.882_729_753_446_685_6;

    #[test]
    fn hurwitz_reference_values() {
        let cases = [(1.7, 0.37, HZ_A), (0.4, 0.81, HZ_B)];
        for (s, q, want) in cases {
            assert!((hurwitz_zeta(s, q) - want).abs() < 1e-12 * want.abs(), "{s} {q}");
        }
    }

    #[test]
    fn gamma_is_reexported() {
        assert!((gamma(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }
}
