//! The fractional gradient of a smooth bump computed two ways (FFT symbol and
//! singular-integral quadrature), and its approach to the classical
//! derivative as `s -> 1`.

use fracmk::grid::{GridSpec, Region, ScalarField};
use fracmk::riesz::checks::localization_error;
use fracmk::riesz::{frac_gradient_direct, KernelSum, SpectralOps};

fn main() -> fracmk::Result<()> {
    let grid = GridSpec::interval(1.0, 4.0, 256, 0.5)?;
    let bump = ScalarField::from_fn(&grid, |x| if x[0].abs() < 1.0 { (-1.0 / (1.0 - x[0] * x[0])).exp() } else { 0.0 });
    let mask = grid.mask();
    let region = Region::Custom(&mask.buffer_inside);
    let ops = SpectralOps::new(&grid);
    for s in [0.3, 0.5, 0.7, 0.9] {
        let spectral = ops.gradient(&bump, s);
        let direct = frac_gradient_direct(&bump, s, &mask.buffer_inside, KernelSum::Periodic)?;
        let gap = direct.axpy(-1.0, &spectral)?.lp_norm(2.0, region)? / spectral.lp_norm(2.0, region)?;
        println!("s = {s}: relative L2 gap between the two paths {gap:.3e}");
    }

    let fine = GridSpec::interval(1.0, 8.0, 512, 2.0)?;
    let bump = ScalarField::from_fn(&fine, |x| if x[0].abs() < 1.0 { (-1.0 / (1.0 - x[0] * x[0])).exp() } else { 0.0 });
    let s_list = [0.5, 0.7, 0.9, 0.99, 0.999];
    for (s, e) in s_list.iter().zip(localization_error(&bump, &s_list)?) {
        println!("sup |D^s w - w'| at s = {s}: {e:.3e}");
    }
    Ok(())
}
