// Walk-on-spheres exit times against the ball bound |Ω|/(2π).

use concavity_lab::radial::exit_time_bound;
use concavity_lab::stochastic::{estimate_exit_time, WalkConfig};
use concavity_lab::{Domain, DomainSpec, Point, Result};

pub fn run_example() -> Result<()> {
    let cfg = WalkConfig::default().with_walks(20_000).with_seed(1);
    for spec in [DomainSpec::disk(1.0), DomainSpec::rectangle(2.0, 1.0), DomainSpec::ellipse(2.0, 1.0)] {
        let d = Domain::new(spec)?;
        let bound = exit_time_bound(&d.stats(), 2);
        for x in [Point::ORIGIN, Point::new(0.3, 0.2)] {
            let e = estimate_exit_time(&d, x, &cfg)?;
            println!("{:?} at {x:?}: E[tau] = {:.5} ± {:.5}   bound {bound:.5}", d.kind(), e.mean, e.std_error);
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
