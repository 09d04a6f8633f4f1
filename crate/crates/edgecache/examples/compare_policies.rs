//! The headline experiment: every update policy on one preset scenario,
//! reported as proportional cost between the clairvoyant bound (0) and the
//! hold-fixed offline placement (1).
//!
//! Run with: `cargo run --example compare_policies [scenario] [reps]`

use edgecache::harness::{run_experiment, ScenarioSpec};
use edgecache::policies::{PolicyKind, PolicySpec};

fn main() -> edgecache::Result<()> {
    let mut args = std::env::args().skip(1);
    let scenario = args.next().unwrap_or_else(|| "ins1.1".into());
    let reps: u32 = args.next().and_then(|r| r.parse().ok()).unwrap_or(30);

    let mut spec = ScenarioSpec::load(&scenario)?;
    spec.replications = reps;

    let policies = vec![
        PolicySpec::rolling_horizon(1),
        PolicySpec::rolling_horizon(2),
        PolicySpec::rolling_horizon(3),
        PolicySpec::new(PolicyKind::Myopic),
        PolicySpec::new(PolicyKind::OneStep),
        PolicySpec::new(PolicyKind::LruSingle),
        PolicySpec::new(PolicyKind::LruMulti),
        PolicySpec::greedy_replace(1),
        PolicySpec::new(PolicyKind::ClairvoyantLb),
        PolicySpec::new(PolicyKind::Offline),
    ];

    let report = run_experiment(&spec, &policies)?;
    print!("{}", report.to_table());
    Ok(())
}
