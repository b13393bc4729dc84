// Torsion of the equilateral triangle is not concave near its corners.

use concavity_lab::analysis::analyze;
use concavity_lab::fdsolver::{build_grid, torsion};
use concavity_lab::{Domain, DomainSpec, Nonlinearity, Result};

pub fn run_example() -> Result<()> {
    let tri = Domain::new(DomainSpec::equilateral_triangle(1.0))?;
    let u = torsion(&build_grid(&tri, 1.0 / 64.0)?)?;
    let a = analyze(&tri, &u, &Nonlinearity::constant(1.0));
    let r = &a.report;
    println!("boundary_nsd {}  interior_nsd {}  tau_bdy {:.4}", r.boundary_nsd, r.interior_nsd, r.tolerances.tau_bdy);
    for c in tri.corners() {
        let near: Vec<_> = r.boundary_violations.iter().filter(|w| w.point.dist(c) < 0.05).collect();
        let worst = near.iter().map(|w| w.value).fold(f64::NEG_INFINITY, f64::max);
        println!("corner {c:?}: {} witnesses within 0.05, largest lambda_max {worst:.4}", near.len());
    }
    println!("peak {:?}, lambda_max there {:.4}", r.peak, r.lambda_max_at_peak);
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
