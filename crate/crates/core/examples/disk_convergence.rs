// Grid solutions on the unit disk against the radial solver.

use concavity_lab::fdsolver::{build_grid, solve_semilinear, SemilinearOptions};
use concavity_lab::radial::solve_radial;
use concavity_lab::{Domain, DomainSpec, Nonlinearity, Result};

pub fn run_example() -> Result<()> {
    let disk = Domain::new(DomainSpec::disk(1.0))?;
    for f in [Nonlinearity::affine(1.0, 1.0), Nonlinearity::log_shift(1.0, 0.5)] {
        let psi = solve_radial(&f, 1.0, 2, 1e-13)?;
        println!("{}", f.name());
        let mut last: Option<f64> = None;
        for k in [8, 16, 32, 64] {
            let rep = solve_semilinear(&build_grid(&disk, 1.0 / k as f64)?, &f, SemilinearOptions::default())?;
            let u = &rep.field;
            let err = (0..u.grid().len())
                .map(|i| (u.values()[i] - psi.eval(u.grid().position(i).norm())).abs())
                .fold(0.0, f64::max);
            let order = last.map_or("-".to_string(), |e| format!("{:.2}", (e / err).log2()));
            println!("  h = 1/{k:<3} nodes {:>6}  Picard {:>3}  max error {err:.3e}  order {order}", u.grid().len(), rep.picard_iters);
            last = Some(err);
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
