// Drive the experiment runner from JSON configs, as the binary does.

use concavity_lab::cli::{run, Command, ExperimentConfig};
use concavity_lab::Result;

pub fn run_example() -> Result<()> {
    let dir = std::env::temp_dir().join("concavity-lab-config");
    let configs = [
        (Command::CheckConditions, r#"{"domain": {"kind": "disk", "params": {"radius": 1}}, "f": {"kind": "affine", "c": 1, "a": 1}}"#),
        (Command::Solve, r#"{"domain": {"kind": "ellipse", "params": {"a": 2, "b": 1}}, "f": {"kind": "log-shift", "c": 1, "a": 1}, "h": 0.0625, "emit_svg": true}"#),
        (Command::ExitTime, r#"{"domain": {"kind": "rectangle", "params": {"length": 2, "width": 1}}, "walk": {"n_walks": 5000, "seed": 9}}"#),
    ];
    for (command, json) in configs {
        let mut cfg = ExperimentConfig::from_json(json)?;
        cfg.output_dir = Some(dir.join(command.name()));
        let out = run(command, &cfg)?;
        println!("{}: {} (exit status {})", command.name(), out.message, out.exit_code());
        for a in &out.artifacts {
            println!("    {}", a.display());
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
