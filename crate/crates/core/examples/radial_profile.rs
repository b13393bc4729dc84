// Radial solutions on the disk for each catalog source term.

use concavity_lab::radial::{radial_max, solve_radial};
use concavity_lab::{Nonlinearity, Result};

pub fn run_example() -> Result<()> {
    for n in [1, 2, 3] {
        let sol = solve_radial(&Nonlinearity::constant(1.0), 1.0, n, 1e-12)?;
        println!("n = {n}: max psi = {:.12} (exact {:.12})", radial_max(&sol), 0.5 / n as f64);
    }
    for f in Nonlinearity::catalog() {
        let sol = solve_radial(&f, 1.0, 2, 1e-12)?;
        let worst = sol.ode_residual(&f).into_iter().filter(|(r, _)| *r > 0.05).map(|(_, e)| e.abs()).fold(0.0, f64::max);
        println!("{:<22} max {:.8}  psi'(1) {:+.6}  {} iterations, ODE residual {worst:.1e}", f.name(), radial_max(&sol), sol.derivative_at_r, sol.picard_iters);
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
