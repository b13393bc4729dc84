// Concavity of u, √u and log u for torsion on the ellipse.

use concavity_lab::analysis::{transform_concavity, Tolerances, Transform};
use concavity_lab::fdsolver::{build_grid, torsion};
use concavity_lab::{Domain, DomainSpec, Nonlinearity, Result};

pub fn run_example() -> Result<()> {
    let d = Domain::new(DomainSpec::ellipse(2.0, 1.0))?;
    let u = torsion(&build_grid(&d, 1.0 / 64.0)?)?;
    let tau = Tolerances::for_solution(&u, &Nonlinearity::constant(1.0)).tau_int;
    for t in [Transform::Power { alpha: 1.0 }, Transform::Power { alpha: 0.5 }, Transform::Sqrt, Transform::Log] {
        let r = transform_concavity(&u, t, tau, Some(0.05))?;
        println!(
            "{t:?}: {} nodes, concave {}, convex {}, max lambda_max {:.4}, min lambda_min {:.4}",
            r.evaluated_nodes,
            r.concave,
            r.convex,
            r.max_lambda_max.map_or(f64::NAN, |w| w.value),
            r.min_lambda_min.map_or(f64::NAN, |w| w.value)
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
