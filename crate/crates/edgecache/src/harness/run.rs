//! Monte-Carlo execution: trace generation, replications and aggregation.
//!
//! Every policy inside one replication consumes the same demand trace
//! (common random numbers), so policy comparisons are paired. Replications
//! run in parallel and aggregate in replication order, which keeps every
//! reported metric a pure function of (scenario, seed, policy list).

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cache::{update_penalty, CacheState};
use crate::demand::{history_window, realize_demand, Catalog, DemandTrace, RealizationMode};
use crate::error::Result;
use crate::harness::report::{PolicyReportRow, SimulationReport};
use crate::harness::{cache_hit_ratio, proportional_cost, ScenarioSpec};
use crate::policies::{
    clairvoyant_lower_bound, PolicyEngine, PolicyKind, PolicySpec, StageContext,
};
use crate::topology::{Cost, CostMatrix};

/// A generated demand realization: the final catalogue and per-stage counts.
#[derive(Clone, Debug)]
pub struct TraceBundle {
    pub catalog: Catalog,
    pub trace: DemandTrace,
}

/// Generates one demand trace for the scenario: contents spawn at the start
/// of every stage, then all alive contents realize their stage counts by
/// the AR model.
pub fn generate_trace(spec: &ScenarioSpec, seed: u64) -> Result<TraceBundle> {
    let model = spec.ar_model()?;
    let h = model.history_depth();
    let mode = if spec.deterministic_demand {
        RealizationMode::Deterministic
    } else {
        RealizationMode::Stochastic
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut catalog = Catalog::initial(spec.n0, model.zipf_skew, spec.demand_scale)?;
    let mut trace = DemandTrace::new(Vec::new(), seed);
    let mut prev_total = spec.n0 as f64 * spec.demand_scale;
    for t in 1..=spec.horizon {
        catalog.spawn_contents(spec.arrivals_per_stage, t, model.zipf_skew, prev_total, &mut rng)?;
        let alive = catalog.alive_at(t);
        let windows: Vec<Vec<f64>> =
            (0..alive as u32).map(|n| history_window(&catalog, &trace, n, t - 1, h)).collect();
        let counts = realize_demand(&model, &windows, t, mode, &mut rng)?;
        prev_total = counts.iter().map(|&c| c as f64).sum::<f64>().max(1.0);
        trace.push_stage(counts);
    }
    Ok(TraceBundle { catalog, trace })
}

/// Serving cost plus hit bookkeeping for one stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StageAccount {
    pub serving: Cost,
    pub hits: u64,
    pub local_hits: u64,
    pub requests: u64,
}

/// Accounts stage delivery: every (content, user) request goes to its
/// cheapest source. A request counts as a hit when an SCBS serves it and as
/// a local hit when that SCBS is the user's home.
pub fn account_stage(state: &CacheState, demand: &[u32], costs: &CostMatrix) -> StageAccount {
    let mut acc = StageAccount::default();
    let users = costs.num_users();
    for (n, &d) in demand.iter().enumerate() {
        if d == 0 {
            continue;
        }
        let owners = state.owners(n as u32);
        for u in 0..users {
            acc.requests += d as u64;
            acc.serving += d as Cost * costs.best_source_cost(owners, u);
            if !owners.is_empty() {
                // SCBS delivery always beats the MCBS (cost dominance).
                acc.hits += d as u64;
                if owners.contains(&costs.home(u)) {
                    acc.local_hits += d as u64;
                }
            }
        }
    }
    acc
}

/// Stage-by-stage outcome of one policy over one replication.
#[derive(Clone, Debug)]
pub struct PolicyRunResult {
    pub label: String,
    pub solver: String,
    pub total_cost: Cost,
    pub serving_cost: Cost,
    pub penalty_cost: Cost,
    pub per_stage_cost: Vec<Cost>,
    pub updates: u64,
    pub hits: u64,
    pub local_hits: u64,
    pub requests: u64,
    pub placement_exact: bool,
    pub greedy_deltas: Vec<Cost>,
    pub wall: std::time::Duration,
}

/// One replication: per-policy results plus the clairvoyant bound and the
/// hold-fixed offline reference cost.
#[derive(Clone, Debug)]
pub struct ReplicationResult {
    pub policies: Vec<PolicyRunResult>,
    pub lb_cost: Cost,
    pub lb_exact: bool,
    pub x0_cost: Cost,
}

fn run_single_policy(
    policy: &PolicySpec,
    spec: &ScenarioSpec,
    bundle: &TraceBundle,
    costs: &CostMatrix,
    windows_per_stage: &[Vec<Vec<f64>>],
) -> Result<PolicyRunResult> {
    let model = spec.ar_model()?;
    let start = Instant::now();
    let stage1_alive = bundle.catalog.alive_at(1);
    let sizes: Vec<u32> =
        bundle.catalog.contents()[..stage1_alive].iter().map(|c| c.size).collect();
    let capacities = vec![spec.capacity; spec.num_scbs()];
    let mut engine = PolicyEngine::new(
        policy.clone(),
        spec.default_solver(),
        sizes,
        capacities,
        spec.ar.zipf_skew,
    );
    let mut result = PolicyRunResult {
        label: policy.label(),
        solver: if policy.is_forecast_driven() {
            String::new() // filled below once the engine resolved the mode
        } else {
            "-".into()
        },
        total_cost: 0,
        serving_cost: 0,
        penalty_cost: 0,
        per_stage_cost: Vec::with_capacity(spec.horizon as usize),
        updates: 0,
        hits: 0,
        local_hits: 0,
        requests: 0,
        placement_exact: true,
        greedy_deltas: Vec::new(),
        wall: std::time::Duration::ZERO,
    };
    if policy.is_forecast_driven() {
        result.solver = engine.solver().label().into();
    }
    for t in 1..=spec.horizon {
        let demand_t = bundle.trace.stage(t);
        let ctx = StageContext {
            t,
            horizon: spec.horizon,
            catalog: &bundle.catalog,
            demand_t,
            windows: &windows_per_stage[(t - 1) as usize],
            model: &model,
            costs,
            gamma: spec.gamma(),
        };
        let penalty = if t == 1 {
            engine.place_initial(&ctx)?;
            0
        } else {
            let action = engine.update(&ctx)?;
            result.updates += action.size() as u64;
            update_penalty(&action, spec.gamma())
        };
        let account = account_stage(engine.cache(), demand_t, costs);
        result.serving_cost += account.serving;
        result.penalty_cost += penalty;
        result.per_stage_cost.push(account.serving + penalty);
        result.hits += account.hits;
        result.local_hits += account.local_hits;
        result.requests += account.requests;
    }
    result.total_cost = result.serving_cost + result.penalty_cost;
    result.placement_exact = engine.placement_exact();
    result.greedy_deltas = std::mem::take(&mut engine.greedy_deltas);
    result.wall = start.elapsed();
    Ok(result)
}

/// Runs every requested policy on one shared demand trace. The clairvoyant
/// bound and the offline hold-fixed cost (`x_0`) are always computed.
pub fn run_replication(
    spec: &ScenarioSpec,
    policies: &[PolicySpec],
    seed: u64,
) -> Result<ReplicationResult> {
    let grid = spec.grid()?;
    let costs = grid.cost_matrix();
    let bundle = generate_trace(spec, seed)?;
    let model = spec.ar_model()?;
    let h = model.history_depth();
    let windows_per_stage: Vec<Vec<Vec<f64>>> = (1..=spec.horizon)
        .map(|t| {
            (0..bundle.catalog.alive_at(t) as u32)
                .map(|n| history_window(&bundle.catalog, &bundle.trace, n, t, h))
                .collect()
        })
        .collect();

    let lb_start = Instant::now();
    let lb = clairvoyant_lower_bound(&bundle.catalog, &bundle.trace, &costs, spec.capacity);
    let lb_wall = lb_start.elapsed();
    let offline = run_single_policy(
        &PolicySpec::new(PolicyKind::Offline),
        spec,
        &bundle,
        &costs,
        &windows_per_stage,
    )?;

    let mut results = Vec::with_capacity(policies.len());
    for policy in policies {
        let run = match policy.kind {
            PolicyKind::ClairvoyantLb => {
                let mut acc = StageAccount::default();
                for (t, state) in lb.states.iter().enumerate() {
                    let stage = account_stage(state, bundle.trace.stage(t as u32 + 1), &costs);
                    acc.serving += stage.serving;
                    acc.hits += stage.hits;
                    acc.local_hits += stage.local_hits;
                    acc.requests += stage.requests;
                }
                debug_assert_eq!(acc.serving, lb.total);
                PolicyRunResult {
                    label: policy.label(),
                    solver: "-".into(),
                    total_cost: lb.total,
                    serving_cost: lb.total,
                    penalty_cost: 0,
                    per_stage_cost: lb.per_stage.clone(),
                    updates: 0,
                    hits: acc.hits,
                    local_hits: acc.local_hits,
                    requests: acc.requests,
                    placement_exact: lb.exact,
                    greedy_deltas: Vec::new(),
                    wall: lb_wall,
                }
            }
            PolicyKind::Offline => offline.clone(),
            _ => run_single_policy(policy, spec, &bundle, &costs, &windows_per_stage)?,
        };
        results.push(run);
    }

    Ok(ReplicationResult {
        policies: results,
        lb_cost: lb.total,
        lb_exact: lb.exact,
        x0_cost: offline.total_cost,
    })
}

/// SplitMix64 step, used to derive independent per-replication seeds.
fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs all replications in parallel and aggregates means and standard
/// errors per policy.
pub fn run_experiment(spec: &ScenarioSpec, policies: &[PolicySpec]) -> Result<SimulationReport> {
    spec.validate()?;
    let reps: Vec<ReplicationResult> = (0..spec.replications as u64)
        .into_par_iter()
        .map(|i| run_replication(spec, policies, mix_seed(spec.seed, i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(spec, policies, &reps))
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Deterministic reduce over replication results, ordered by replication.
pub fn aggregate(
    spec: &ScenarioSpec,
    policies: &[PolicySpec],
    reps: &[ReplicationResult],
) -> SimulationReport {
    let lb_mean = reps.iter().map(|r| r.lb_cost as f64).sum::<f64>() / reps.len() as f64;
    let x0_mean = reps.iter().map(|r| r.x0_cost as f64).sum::<f64>() / reps.len() as f64;
    let mut rows = Vec::with_capacity(policies.len());
    for (idx, policy) in policies.iter().enumerate() {
        let runs: Vec<&PolicyRunResult> = reps.iter().map(|r| &r.policies[idx]).collect();
        let costs: Vec<f64> = runs.iter().map(|r| r.total_cost as f64).collect();
        let (mean_cost, stderr_cost) = mean_and_stderr(&costs);
        let proportional: Vec<f64> = reps
            .iter()
            .map(|r| {
                proportional_cost(
                    r.policies[idx].total_cost as f64,
                    r.x0_cost as f64,
                    r.lb_cost as f64,
                )
            })
            .collect();
        let degenerate = proportional.iter().any(|p| !p.is_finite());
        let proportional_mean = if degenerate {
            f64::INFINITY
        } else {
            proportional.iter().sum::<f64>() / proportional.len() as f64
        };
        let hit_ratios: Vec<f64> =
            runs.iter().filter_map(|r| cache_hit_ratio(r.hits, r.requests)).collect();
        let local_ratios: Vec<f64> =
            runs.iter().filter_map(|r| cache_hit_ratio(r.local_hits, r.requests)).collect();
        let hit_ratio = (!hit_ratios.is_empty())
            .then(|| hit_ratios.iter().sum::<f64>() / hit_ratios.len() as f64);
        let local_hit_ratio = (!local_ratios.is_empty())
            .then(|| local_ratios.iter().sum::<f64>() / local_ratios.len() as f64);
        let mean_updates =
            runs.iter().map(|r| r.updates as f64).sum::<f64>() / runs.len() as f64;
        let wall_ms = runs.iter().map(|r| r.wall.as_secs_f64() * 1e3).sum::<f64>()
            / runs.len() as f64;
        let greedy_replacements: u64 = runs.iter().map(|r| r.greedy_deltas.len() as u64).sum();
        let greedy_delta_max = runs.iter().flat_map(|r| r.greedy_deltas.iter().copied()).max();
        rows.push(PolicyReportRow {
            policy: policy.label(),
            solver_mode: runs[0].solver.clone(),
            mean_cost,
            stderr_cost,
            proportional_cost: proportional_mean,
            proportional_degenerate: degenerate,
            hit_ratio,
            local_hit_ratio,
            mean_updates,
            wall_ms,
            placement_exact: runs.iter().all(|r| r.placement_exact),
            greedy_replacements,
            greedy_delta_max,
        });
    }
    SimulationReport {
        scenario: spec.name.clone(),
        ratio: spec.ratio(),
        replications: reps.len() as u32,
        seed: spec.seed,
        lb_mean_cost: lb_mean,
        x0_mean_cost: x0_mean,
        lb_exact: reps.iter().all(|r| r.lb_exact),
        rows,
    }
}
