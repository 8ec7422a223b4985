//! The `masslab run` pipeline from library code: parse a config, execute,
//! inspect the checks and write the report next to a temporary stem.

use masslab::config::ExperimentConfig;
use masslab::runner::{execute, write_outputs};

const CONFIG: &str = r#"{
    "name": "schwarzschild-mass",
    "metric": {"kind": "schwarzschild", "mass": 1.0},
    "domain": {"half_extent": 8, "spacing": 0.5, "excision_radius": 1.0},
    "analysis": ["mass", "cylinder"]
}"#;

fn main() -> masslab::Result<()> {
    let cfg = ExperimentConfig::from_json(CONFIG)?;
    let exp = execute(&cfg)?;
    for c in &exp.report.checks {
        println!("{:<22} {} {}", c.name, if c.passed { "pass" } else { "FAIL" }, c.detail);
    }
    let stem = std::env::temp_dir().join("masslab-run-config");
    let written = write_outputs(&exp, &stem, true)?;
    println!("report: {}", written.report.display());
    Ok(())
}
