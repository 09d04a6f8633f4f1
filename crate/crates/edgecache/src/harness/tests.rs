use super::*;
use crate::policies::{PolicyKind, PolicySpec};

fn tiny_scenario() -> ScenarioSpec {
    let mut spec = ScenarioSpec::preset("ins1.1").unwrap();
    spec.replications = 2;
    spec
}

#[test]
fn proportional_cost_examples() {
    assert_eq!(proportional_cost(100.0, 200.0, 100.0), 0.0);
    assert_eq!(proportional_cost(200.0, 200.0, 100.0), 1.0);
    assert_eq!(proportional_cost(150.0, 200.0, 100.0), 0.5);
    assert_eq!(proportional_cost(100.0, 100.0, 100.0), 0.0);
    assert!(proportional_cost(150.0, 100.0, 100.0).is_infinite());
}

#[test]
fn hit_ratio_examples() {
    assert_eq!(cache_hit_ratio(10, 10), Some(1.0));
    assert_eq!(cache_hit_ratio(0, 10), Some(0.0));
    assert_eq!(cache_hit_ratio(0, 0), None);
    assert_eq!(cache_hit_ratio(3, 12), Some(0.25));
}

#[test]
fn hand_counted_stage_account() {
    use crate::cache::CacheState;
    use crate::topology::GridTopology;
    let costs = GridTopology::build_grid(1, 2, 2, 20).unwrap().cost_matrix();
    let mut state = CacheState::unit(2, 2, 1);
    state.insert_unchecked(0, 1);
    // Content 0: cached at SCBS 1. User 0 (home 1): local hit, cost 0.
    // User 1 (home 2): remote hit, cost 2. Content 1 uncached: both users
    // from the MCBS at 20.
    let acc = account_stage(&state, &[3, 2], &costs);
    assert_eq!(acc.requests, 10);
    assert_eq!(acc.hits, 6);
    assert_eq!(acc.local_hits, 3);
    assert_eq!(acc.serving, 3 * 2 + 2 * 40);
}

#[test]
fn trace_generation_is_deterministic_and_grows() {
    let spec = tiny_scenario();
    let a = generate_trace(&spec, 7).unwrap();
    let b = generate_trace(&spec, 7).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.catalog, b.catalog);
    assert_eq!(a.catalog.len(), spec.final_catalog_size());
    assert_eq!(a.trace.horizon(), spec.horizon);
    let c = generate_trace(&spec, 8).unwrap();
    assert_ne!(a.trace, c.trace);
}

#[test]
fn demand_level_stays_sane_over_the_horizon() {
    // The diurnal profile must not blow up or extinguish the AR recursion.
    let spec = ScenarioSpec::preset("ins1.3").unwrap();
    let bundle = generate_trace(&spec, 42).unwrap();
    let base = spec.n0 as f64 * spec.demand_scale;
    for t in 1..=spec.horizon {
        let total = bundle.trace.total_at(t) as f64;
        assert!(total < 50.0 * base, "stage {t} exploded: {total}");
    }
    let last = bundle.trace.total_at(spec.horizon) as f64;
    assert!(last > 0.02 * base, "demand died out: {last}");
}

#[test]
fn lb_only_policy_list_reports_the_bound() {
    let spec = tiny_scenario();
    let policies = [PolicySpec::new(PolicyKind::ClairvoyantLb)];
    let rep = run_replication(&spec, &policies, 3).unwrap();
    assert_eq!(rep.policies[0].total_cost, rep.lb_cost);
    assert_eq!(rep.policies[0].penalty_cost, 0);
}

#[test]
fn single_stage_horizon_has_no_update_cost() {
    let mut spec = tiny_scenario();
    spec.horizon = 1;
    let policies =
        [PolicySpec::rolling_horizon(1), PolicySpec::new(PolicyKind::Myopic)];
    let rep = run_replication(&spec, &policies, 5).unwrap();
    for run in &rep.policies {
        assert_eq!(run.penalty_cost, 0);
        assert_eq!(run.updates, 0);
        assert_eq!(run.total_cost, run.serving_cost);
    }
}

#[test]
fn same_seed_reproduces_the_replication() {
    let spec = tiny_scenario();
    let policies = [
        PolicySpec::rolling_horizon(1),
        PolicySpec::new(PolicyKind::LruMulti),
        PolicySpec::new(PolicyKind::OneStep),
    ];
    let a = run_replication(&spec, &policies, 11).unwrap();
    let b = run_replication(&spec, &policies, 11).unwrap();
    assert_eq!(a.lb_cost, b.lb_cost);
    assert_eq!(a.x0_cost, b.x0_cost);
    for (x, y) in a.policies.iter().zip(&b.policies) {
        assert_eq!(x.total_cost, y.total_cost);
        assert_eq!(x.per_stage_cost, y.per_stage_cost);
        assert_eq!(x.hits, y.hits);
        assert_eq!(x.updates, y.updates);
    }
}

#[test]
fn accounting_identity_holds() {
    let spec = tiny_scenario();
    let policies = [PolicySpec::rolling_horizon(2), PolicySpec::new(PolicyKind::LruSingle)];
    let rep = run_replication(&spec, &policies, 13).unwrap();
    for run in &rep.policies {
        assert_eq!(run.total_cost, run.serving_cost + run.penalty_cost);
        assert_eq!(run.total_cost, run.per_stage_cost.iter().sum::<i64>());
    }
}

#[test]
fn single_replication_experiment_equals_the_replication() {
    let mut spec = tiny_scenario();
    spec.replications = 1;
    let policies = [PolicySpec::new(PolicyKind::Myopic)];
    let report = run_experiment(&spec, &policies).unwrap();
    // Reproduce the same seed derivation as the experiment loop.
    let row = report.row("myopic").unwrap();
    assert_eq!(row.stderr_cost, 0.0);
    assert!(report.lb_mean_cost <= row.mean_cost);
}

#[test]
fn proportional_anchors_hold_in_reports() {
    let mut spec = tiny_scenario();
    spec.replications = 3;
    let policies = [
        PolicySpec::new(PolicyKind::ClairvoyantLb),
        PolicySpec::new(PolicyKind::Offline),
        PolicySpec::rolling_horizon(1),
    ];
    let report = run_experiment(&spec, &policies).unwrap();
    let lb = report.row("lb").unwrap();
    let offline = report.row("offline").unwrap();
    assert!(lb.proportional_cost.abs() < 1e-12);
    assert!((offline.proportional_cost - 1.0).abs() < 1e-12);
    for row in &report.rows {
        assert!(report.lb_mean_cost <= row.mean_cost + 1e-9);
    }
}

#[test]
fn csv_has_the_stable_header_and_one_row_per_policy() {
    let mut spec = tiny_scenario();
    spec.replications = 1;
    let policies = [PolicySpec::new(PolicyKind::Myopic), PolicySpec::rolling_horizon(1)];
    let report = run_experiment(&spec, &policies).unwrap();
    let csv = report.to_csv();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scenario,policy,solver_mode,mean_cost,stderr_cost,proportional_cost,hit_ratio,mean_updates,wall_ms,local_hit_ratio"
    );
    assert_eq!(lines.count(), 2);
    assert!(!csv.contains('\r'));
    // JSON serializes without error and carries the same rows.
    let json = report.to_json();
    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed["rows"].as_array().unwrap().len(), 2);
}
