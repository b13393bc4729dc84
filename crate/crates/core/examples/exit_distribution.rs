// Exit points from an off-center start in the unit disk against the Poisson kernel.

use std::f64::consts::PI;

use concavity_lab::stochastic::{exit_histogram, WalkConfig};
use concavity_lab::{Domain, DomainSpec, Point, Result};

pub fn run_example() -> Result<()> {
    let disk = Domain::new(DomainSpec::disk(1.0))?;
    let x = Point::new(0.5, 0.0);
    let bins = 12;
    let cfg = WalkConfig::default().with_walks(50_000).with_seed(3);
    let hist = exit_histogram(&disk, x, bins, &cfg)?;
    let kernel = |t: f64| (1.0 - x.norm_sq()) / (2.0 * PI * (1.0 - 2.0 * x.norm() * t.cos() + x.norm_sq()));
    let kept = (cfg.n_walks - hist.discarded) as f64;
    for (s, c) in hist.bin_starts.iter().zip(&hist.counts) {
        // midpoint rule over the bin, arclength equals angle on the unit circle
        let expected = kept * (0..16).map(|j| kernel(s + hist.bin_width * (j as f64 + 0.5) / 16.0)).sum::<f64>() * hist.bin_width / 16.0;
        println!("theta in [{s:.3}, {:.3}): {c:>6} observed, {expected:>9.1} expected", s + hist.bin_width);
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
