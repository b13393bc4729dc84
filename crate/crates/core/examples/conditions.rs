// Lipschitz thresholds and the two structural conditions for every catalog source term.

use concavity_lab::nonlinearity::{check_condition, Theorem};
use concavity_lab::{Domain, DomainSpec, Nonlinearity, Result};

pub fn run_example() -> Result<()> {
    for spec in [DomainSpec::disk(1.0), DomainSpec::ellipse(2.0, 1.0), DomainSpec::rounded_rectangle(4.0, 1.0, 0.25)] {
        let d = Domain::new(spec)?;
        let stats = d.stats();
        println!("{:?}: area {:.4}", d.kind(), stats.area);
        for f in Nonlinearity::catalog() {
            let t1 = check_condition(&f, &stats, 2, Theorem::T1);
            let t2 = check_condition(&f, &stats, 2, Theorem::T2);
            println!(
                "  {:<22} threshold {:.4}  T1 {:<5} (margin {:+.4})  T2 {:<5} (margin {:+.4}) {:?}",
                f.name(),
                t1.threshold,
                t1.passes,
                t1.margin,
                t2.passes,
                t2.margin,
                t1.violated
            );
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
