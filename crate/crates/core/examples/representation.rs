// Second directional derivatives against their occupation-time and boundary representation.

use concavity_lab::analysis::{boundary_hessian_with, default_probe_count, hessian_field, BoundaryFitOptions};
use concavity_lab::fdsolver::{build_grid, solve_semilinear, SemilinearOptions};
use concavity_lab::stochastic::{verify_representation, WalkConfig};
use concavity_lab::{Domain, DomainSpec, Nonlinearity, Point, Result};

pub fn run_example() -> Result<()> {
    let d = Domain::new(DomainSpec::ellipse(2.0, 1.0))?;
    let f = Nonlinearity::affine(1.0, 0.3);
    let u = solve_semilinear(&build_grid(&d, 1.0 / 64.0)?, &f, SemilinearOptions::default())?.field;
    let hess = hessian_field(&u);
    let bdy = boundary_hessian_with(&d, &u, default_probe_count(&d, u.grid().h), BoundaryFitOptions { radius_cells: 4.0, cubic: true });
    let cfg = WalkConfig::default().with_walks(20_000).with_seed(42);
    for x in [Point::ORIGIN, Point::new(0.5, 0.2)] {
        for e in [Point::new(1.0, 0.0), Point::new(0.0, 1.0)] {
            let c = verify_representation(&d, &f, &u, &hess, &bdy, x, e, &cfg)?;
            println!(
                "x {x:?} e {e:?}: lhs {:+.5}  occupation {:+.5}  boundary {:+.5}  total {:+.5} ± {:.5}  z {:+.2}",
                c.lhs, c.rhs_occupation.mean, c.rhs_boundary.mean, c.rhs_total.mean, c.rhs_total.std_error, c.z_score
            );
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
