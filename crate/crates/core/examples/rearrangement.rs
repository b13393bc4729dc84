// Rearranged solutions against the equal-area disk: v ≥ u* and max u ≤ max ψ.

use concavity_lab::rearrange::{talenti_compare, theorem2_experiment};
use concavity_lab::{Domain, DomainSpec, Nonlinearity, Result};

pub fn run_example() -> Result<()> {
    let h = 1.0 / 64.0;
    for spec in [DomainSpec::rectangle(2.0, 1.0), DomainSpec::ellipse(2.0, 1.0)] {
        let d = Domain::new(spec)?;
        for f in [Nonlinearity::constant(1.0), Nonlinearity::affine(1.0, 0.3)] {
            let t = talenti_compare(&d, &f, h)?;
            let e = theorem2_experiment(&d, &f, h)?;
            println!(
                "{:?} {:<16} min(v - u*) {:+.2e} at r = {:.3}   max u {:.5} <= max psi {:.5}: {} (certified {})",
                d.kind(),
                f.name(),
                t.min_gap,
                t.min_gap_radius,
                e.max_u,
                e.max_psi,
                e.pass,
                e.certified
            );
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
