// Moment identities of planar Brownian motion and of the uniform direction.

use concavity_lab::stochastic::{brownian_unit_tests, WalkConfig};
use concavity_lab::Result;

pub fn run_example() -> Result<()> {
    let rep = brownian_unit_tests(&WalkConfig::default().with_walks(20_000).with_seed(5))?;
    for c in rep.second_moment.iter().chain(&rep.quadratic_form) {
        println!("{:<28} expected {:+.4}  estimate {:+.4} ± {:.4}  pass {}", c.label, c.expected, c.estimate.mean, c.estimate.std_error, c.pass);
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
