// log|λ_max| at the torsion peak of rounded rectangles grows linearly in the aspect ratio.

use concavity_lab::analysis::eccentricity_sweep;
use concavity_lab::{Nonlinearity, Result};

pub fn run_example() -> Result<()> {
    let sweep = eccentricity_sweep(&[1.0, 2.0, 4.0, 6.0, 8.0], 1.0 / 64.0, &Nonlinearity::constant(1.0))?;
    for row in &sweep.rows {
        println!("aspect {:>4}  lambda_max {:+.4e}  log|lambda_max| {:+.4}", row.aspect, row.lambda_max, row.log_abs_lambda_max);
    }
    if let Some(fit) = sweep.fit {
        println!("slope {:.4}, intercept {:.4}, R^2 {:.5}", fit.slope, fit.intercept, fit.r_squared);
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
