// Build the catalog domains and print their geometric invariants.

use concavity_lab::{Domain, DomainSpec, Point, Result};

pub fn run_example() -> Result<()> {
    let specs = [
        DomainSpec::disk(1.0),
        DomainSpec::ellipse(2.0, 1.0),
        DomainSpec::rectangle(2.0, 1.0),
        DomainSpec::rounded_rectangle(2.0, 1.0, 0.25),
        DomainSpec::stadium(2.0, 1.0),
        DomainSpec::equilateral_triangle(1.0),
    ];
    println!("{:<22} {:>9} {:>9} {:>9} {:>9} {:>7}", "kind", "area", "inradius", "diameter", "perimeter", "smooth");
    for spec in specs {
        let d = Domain::new(spec)?;
        let s = d.stats();
        println!(
            "{:<22} {:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>7}",
            format!("{:?}", d.kind()),
            s.area,
            s.inradius,
            s.diameter,
            s.boundary_length,
            s.smooth_boundary
        );
        let probe = Point::new(0.25, 0.1);
        let (q, arc) = d.closest_boundary(probe);
        println!("    sdf{probe:?} = {:.5}, nearest boundary point {q:?} at s = {arc:.4}", d.sdf(probe));
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
