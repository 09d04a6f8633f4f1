//! Experiment harness: scenarios, Monte-Carlo runs and reports.

mod report;
mod run;
mod scenario;

pub use report::{PolicyReportRow, SimulationReport};
pub use run::{
    account_stage, aggregate, generate_trace, run_experiment, run_replication, PolicyRunResult,
    ReplicationResult, StageAccount, TraceBundle,
};
pub use scenario::{diurnal_profile, ArSpec, MuProfile, ScenarioSpec, TopologySpec};

/// `(cost - lb) / (x0 - lb)`: 0 at the clairvoyant bound, 1 at the
/// hold-fixed offline cost. Degenerate `x0 = lb` maps to 0 when the policy
/// also attains the bound and to infinity otherwise.
pub fn proportional_cost(policy_cost: f64, x0: f64, lb: f64) -> f64 {
    debug_assert!(x0 >= lb);
    if x0 > lb {
        (policy_cost - lb) / (x0 - lb)
    } else if (policy_cost - lb).abs() < 1e-9 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Fraction of requests served by any SCBS; `None` when nothing was
/// requested.
pub fn cache_hit_ratio(hits: u64, requests: u64) -> Option<f64> {
    (requests > 0).then(|| hits as f64 / requests as f64)
}

#[cfg(test)]
mod tests;
