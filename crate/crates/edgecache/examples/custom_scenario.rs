//! Writing and running a scenario config file instead of a preset.
//!
//! Run with: `cargo run --example custom_scenario`

use edgecache::harness::{run_experiment, ScenarioSpec};
use edgecache::policies::PolicySpec;

const SCENARIO: &str = r#"{
    "name": "two-by-two",
    "topology": { "rows": 2, "cols": 2, "hop_cost": 2, "mcbs_cost": 20 },
    "n0": 12,
    "arrivals_per_stage": 1,
    "capacity": 2,
    "gamma": 100,
    "horizon": 12,
    "ar": {
        "beta": [0.6, 0.3, 0.1],
        "noise_sigma": 0.5,
        "zipf_skew": 0.8,
        "mu_profile": "flat"
    },
    "demand_scale": 1.0,
    "replications": 20,
    "seed": 7
}"#;

fn main() -> edgecache::Result<()> {
    let dir = std::env::temp_dir();
    let path = dir.join("edgecache-custom-scenario.json");
    std::fs::write(&path, SCENARIO)?;

    let spec = ScenarioSpec::load(path.to_str().expect("utf-8 temp path"))?;
    println!(
        "loaded {}: {} SCBSs, ratio {:.0}%, default solver {:?}",
        spec.name,
        spec.num_scbs(),
        spec.ratio() * 100.0,
        spec.default_solver()
    );

    let policies: Vec<PolicySpec> = ["rh1", "myopic", "lru-m", "lb", "offline"]
        .iter()
        .map(|t| PolicySpec::parse(t))
        .collect::<edgecache::Result<_>>()?;
    let report = run_experiment(&spec, &policies)?;
    print!("{}", report.to_table());

    // The same report, machine-readable.
    let json = report.to_json();
    println!("json report: {} bytes (rows: {})", json.len(), report.rows.len());
    Ok(())
}
