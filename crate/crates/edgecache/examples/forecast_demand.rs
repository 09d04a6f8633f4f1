//! Demand-model walkthrough: AR forecasting, trace generation and CSV export.
//!
//! Run with: `cargo run --example forecast_demand`

use edgecache::demand::{forecast, ArModel};
use edgecache::harness::{generate_trace, ScenarioSpec};

fn main() -> edgecache::Result<()> {
    // One content with a falling demand history (most recent first).
    let model = ArModel::flat(vec![0.6, 0.3, 0.1], 24, 0.0, 0.8)?;
    let history = vec![10.0, 20.0, 30.0];
    println!("history (most recent first): {history:?}");
    for steps in 1..=4 {
        let f = forecast(&model, &history, 1, steps)?;
        println!("  forecast {steps} stage(s) ahead: {f:.3}");
    }

    // A full scenario trace: catalogue growth plus per-stage realizations.
    let spec = ScenarioSpec::load("ins1.1")?;
    let bundle = generate_trace(&spec, spec.seed)?;
    println!(
        "\nscenario {}: catalogue {} -> {} contents over {} stages",
        spec.name,
        spec.n0,
        bundle.catalog.len(),
        spec.horizon
    );
    for t in [1, 6, 12, 18, 24] {
        println!(
            "  stage {t:>2}: {} alive contents, {} total requests",
            bundle.catalog.alive_at(t),
            bundle.trace.total_at(t)
        );
    }

    let csv = bundle.trace.to_csv();
    let lines: Vec<&str> = csv.lines().take(6).collect();
    println!("\ntrace CSV head:\n{}", lines.join("\n"));
    Ok(())
}
