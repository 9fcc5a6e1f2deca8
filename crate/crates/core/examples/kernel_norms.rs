//! Ball and tail norms of the Riesz kernel: closed forms against radial
//! quadrature, and the approximate-identity limit as the order goes to 0.

use fracmk::riesz::checks::{kernel_norm_ball_quadrature, kernel_norm_tail_quadrature};
use fracmk::riesz::{kernel_norm_ball, kernel_norm_tail, riesz_gamma};

fn main() -> fracmk::Result<()> {
    println!("{:>2} {:>5} {:>4} {:>14} {:>10} {:>14} {:>10}", "d", "alpha", "R", "ball", "rel err", "tail", "rel err");
    for d in [1usize, 2] {
        let p = if d == 1 { 1.25 } else { 2.0 };
        for alpha in [0.25, 0.5, 0.75] {
            for r in [0.5, 2.0] {
                let ball = kernel_norm_ball(d, alpha, r)?;
                let tail = kernel_norm_tail(d, alpha, p, r)?;
                let qb = kernel_norm_ball_quadrature(d, alpha, r);
                let qt = kernel_norm_tail_quadrature(d, alpha, p, r);
                println!(
                    "{d:>2} {alpha:>5} {r:>4} {ball:>14.10} {:>10.2e} {tail:>14.10} {:>10.2e}",
                    (qb - ball).abs() / ball,
                    (qt - tail).abs() / tail
                );
            }
        }
    }
    println!("\nalpha -> 0 on the unit ball (d = 1):");
    for alpha in [0.4, 0.2, 0.1, 0.05, 0.01] {
        println!(
            "  alpha {alpha:<5} gamma {:.6}  ball {:.6}  tail(p=2) {:.6}",
            riesz_gamma(1, alpha),
            kernel_norm_ball(1, alpha, 1.0)?,
            kernel_norm_tail(1, alpha, 2.0, 1.0)?
        );
    }
    Ok(())
}
