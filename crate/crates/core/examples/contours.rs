// Write a solution field as CSV and render its level curves to SVG.

use concavity_lab::contour::render_contours;
use concavity_lab::fdsolver::{build_grid, torsion};
use concavity_lab::{io, Domain, DomainSpec, Result};

pub fn run_example() -> Result<()> {
    let dir = std::env::temp_dir().join("concavity-lab-contours");
    std::fs::create_dir_all(&dir)?;
    let d = Domain::new(DomainSpec::rectangle(2.0, 1.0))?;
    let u = torsion(&build_grid(&d, 1.0 / 32.0)?)?;
    let csv = dir.join("rectangle_torsion.csv");
    io::write_field_csv(&u, &csv)?;
    let svg = dir.join("rectangle_torsion.svg");
    let set = render_contours(&csv, 5, &svg)?;
    for lc in &set.levels {
        println!("level {:.5}: {} curve(s), closed {:?}", lc.level, lc.polylines.len(), lc.polylines.iter().map(|p| p.closed).collect::<Vec<_>>());
    }
    println!("wrote {}", svg.display());
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
