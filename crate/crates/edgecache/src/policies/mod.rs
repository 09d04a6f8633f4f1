//! Cache-update policies behind one stage-update interface.
//!
//! Forecast-driven policies (myopic, one-step, rolling horizon, greedy
//! replacement) differ only in how they build the effective per-content
//! weights; the weights then go to a configurable solver: the exact stage
//! solver, the single-copy flow formulation, or the greedy replacement
//! heuristic. The offline + LRU baselines and the clairvoyant lower bound
//! bypass the solvers.

mod greedy;
mod lru;

pub use greedy::{greedy_replace, GreedyOutcome};
pub use lru::{lru_update, LruBook};

use serde::{Deserialize, Serialize};

use crate::cache::{CacheAction, CacheState};
use crate::demand::{forecast, zipf_popularity, ArModel, Catalog, DemandTrace};
use crate::error::{Error, Result};
use crate::solvers::{
    solve_exact_update_capped, solve_single_copy_update, solve_static_placement, ExactCaps,
    PlacementResult, StageProblem,
};
use crate::topology::{Cost, CostMatrix};

/// Which engine turns stage weights into an action.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    /// Exact multi-copy stage solver (tiny instances only).
    Exact,
    /// Exact single-copy assignment via min-cost flow.
    SingleCopyFlow,
    /// Greedy replacement heuristic (multi-copy).
    Greedy,
}

impl SolverMode {
    pub fn label(self) -> &'static str {
        match self {
            SolverMode::Exact => "exact",
            SolverMode::SingleCopyFlow => "flow",
            SolverMode::Greedy => "greedy",
        }
    }
}

/// Policy families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// Zipf-assumption placement at stage 1, never updated (the `x_0`
    /// reference point).
    Offline,
    /// Offline placement plus per-stage popularity replacement, single copy
    /// network-wide.
    LruSingle,
    /// Offline placement plus per-stage popularity replacement, copies
    /// allowed everywhere.
    LruMulti,
    /// Optimizes the current stage only.
    Myopic,
    /// Current stage plus a rescaled-Zipf estimate of all remaining stages.
    OneStep,
    /// Current stage plus `horizon` stages of AR forecasts.
    RollingHorizon,
    /// Rolling-horizon weights decided by the replacement heuristic.
    GreedyReplace,
    /// Per-stage optimal placement with true demand and zero penalty.
    ClairvoyantLb,
}

/// Full description of one policy instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    /// Lookahead depth for RollingHorizon / GreedyReplace.
    #[serde(default)]
    pub horizon: u32,
    /// Replacement budget for LRU (per SCBS) and GreedyReplace (total);
    /// `None` picks the capacity-based default.
    #[serde(default)]
    pub replacements: Option<u32>,
    /// Solver override for the forecast-driven kinds.
    #[serde(default)]
    pub solver: Option<SolverMode>,
    /// Recency decay for the LRU score (1.0 = pure frequency).
    #[serde(default = "default_lru_decay")]
    pub lru_decay: f64,
}

fn default_lru_decay() -> f64 {
    0.5
}

impl PolicySpec {
    pub fn new(kind: PolicyKind) -> PolicySpec {
        PolicySpec { kind, horizon: 0, replacements: None, solver: None, lru_decay: 0.5 }
    }

    pub fn rolling_horizon(gamma_horizon: u32) -> PolicySpec {
        PolicySpec { horizon: gamma_horizon, ..PolicySpec::new(PolicyKind::RollingHorizon) }
    }

    pub fn greedy_replace(gamma_horizon: u32) -> PolicySpec {
        PolicySpec { horizon: gamma_horizon, ..PolicySpec::new(PolicyKind::GreedyReplace) }
    }

    /// Parses a CLI token: `offline`, `lru-s`, `lru-m`, `myopic`, `onestep`,
    /// `rh<k>`, `greedy` / `greedy<k>`, `lb`.
    pub fn parse(token: &str) -> Result<PolicySpec> {
        let t = token.trim().to_ascii_lowercase();
        let spec = match t.as_str() {
            "offline" => PolicySpec::new(PolicyKind::Offline),
            "lru-s" => PolicySpec::new(PolicyKind::LruSingle),
            "lru-m" => PolicySpec::new(PolicyKind::LruMulti),
            "myopic" => PolicySpec::new(PolicyKind::Myopic),
            "onestep" => PolicySpec::new(PolicyKind::OneStep),
            "lb" => PolicySpec::new(PolicyKind::ClairvoyantLb),
            "greedy" => PolicySpec::greedy_replace(1),
            _ => {
                if let Some(k) = t.strip_prefix("rh") {
                    let gamma: u32 = k
                        .parse()
                        .map_err(|_| Error::Validation(format!("bad policy token {token:?}")))?;
                    PolicySpec::rolling_horizon(gamma)
                } else if let Some(k) = t.strip_prefix("greedy") {
                    let gamma: u32 = k
                        .parse()
                        .map_err(|_| Error::Validation(format!("bad policy token {token:?}")))?;
                    PolicySpec::greedy_replace(gamma)
                } else {
                    return Err(Error::Validation(format!("unknown policy {token:?}")));
                }
            }
        };
        Ok(spec)
    }

    pub fn label(&self) -> String {
        match self.kind {
            PolicyKind::Offline => "offline".into(),
            PolicyKind::LruSingle => "lru-s".into(),
            PolicyKind::LruMulti => "lru-m".into(),
            PolicyKind::Myopic => "myopic".into(),
            PolicyKind::OneStep => "onestep".into(),
            PolicyKind::RollingHorizon => format!("rh{}", self.horizon),
            PolicyKind::GreedyReplace => format!("greedy{}", self.horizon),
            PolicyKind::ClairvoyantLb => "lb".into(),
        }
    }

    /// True for the kinds that build weights and delegate to a solver.
    pub fn is_forecast_driven(&self) -> bool {
        matches!(
            self.kind,
            PolicyKind::Myopic
                | PolicyKind::OneStep
                | PolicyKind::RollingHorizon
                | PolicyKind::GreedyReplace
        )
    }
}

/// Everything a policy may observe at stage `t`: the catalogue published so
/// far, realized demand up to and including `t`, and the scenario constants.
#[derive(Clone, Copy)]
pub struct StageContext<'a> {
    pub t: u32,
    pub horizon: u32,
    pub catalog: &'a Catalog,
    pub demand_t: &'a [u32],
    /// AR windows per content as of stage `t` (most recent first).
    pub windows: &'a [Vec<f64>],
    pub model: &'a ArModel,
    pub costs: &'a CostMatrix,
    pub gamma: Cost,
}

/// Immediate weights: the realized demand of the current stage.
pub fn myopic_weights(demand_t: &[u32]) -> Vec<f64> {
    demand_t.iter().map(|&d| d as f64).collect()
}

/// Rolling-horizon weights: realized demand plus up to `gamma_horizon`
/// stages of AR forecasts (truncated at the end of the horizon).
pub fn rolling_horizon_weights(
    model: &ArModel,
    windows: &[Vec<f64>],
    demand_t: &[u32],
    t: u32,
    horizon: u32,
    gamma_horizon: u32,
) -> Result<Vec<f64>> {
    let steps = gamma_horizon.min(horizon.saturating_sub(t));
    let mut weights = myopic_weights(demand_t);
    for (n, w) in weights.iter_mut().enumerate() {
        for tau in 1..=steps {
            *w += forecast(model, &windows[n], t, tau)?;
        }
    }
    Ok(weights)
}

/// One-step weights: realized demand plus `(T - t)` future stages estimated
/// by the rescaled Zipf profile `p_n * total_t`.
pub fn one_step_weights(demand_t: &[u32], zipf_p: &[f64], t: u32, horizon: u32) -> Vec<f64> {
    let total: f64 = demand_t.iter().map(|&d| d as f64).sum();
    let remaining = horizon.saturating_sub(t) as f64;
    demand_t
        .iter()
        .zip(zipf_p)
        .map(|(&d, &p)| d as f64 + remaining * p * total)
        .collect()
}

/// Myopic stage update: delegate the immediate-demand weights to a solver.
pub fn myopic_update(p: &StageProblem, mode: SolverMode, caps: &ExactCaps) -> Result<CacheAction> {
    dispatch(p, mode, caps, None)
}

/// Rolling-horizon stage update on a prebuilt [`StageProblem`] whose weights
/// already include the forecast horizon.
pub fn rolling_horizon_update(
    p: &StageProblem,
    mode: SolverMode,
    caps: &ExactCaps,
    greedy_rounds: Option<u32>,
) -> Result<CacheAction> {
    dispatch(p, mode, caps, greedy_rounds)
}

fn dispatch(
    p: &StageProblem,
    mode: SolverMode,
    caps: &ExactCaps,
    greedy_rounds: Option<u32>,
) -> Result<CacheAction> {
    match mode {
        SolverMode::Exact => solve_exact_update_capped(p, true, caps),
        SolverMode::SingleCopyFlow => solve_single_copy_update(p),
        SolverMode::Greedy => {
            let rounds = greedy_rounds
                .unwrap_or_else(|| p.capacities().iter().copied().sum::<u32>());
            Ok(greedy_replace(p, rounds).action)
        }
    }
}

/// Clairvoyant lower bound: for every stage, the cost of the best placement
/// for the true realized demand with zero update penalty. `exact` is false
/// when any stage had to fall back to the greedy placement.
#[derive(Clone, Debug)]
pub struct LowerBoundRun {
    pub total: Cost,
    pub per_stage: Vec<Cost>,
    pub states: Vec<CacheState>,
    pub exact: bool,
}

pub fn clairvoyant_lower_bound(
    catalog: &Catalog,
    trace: &DemandTrace,
    costs: &CostMatrix,
    capacity: u32,
) -> LowerBoundRun {
    let horizon = trace.horizon();
    let m_count = costs.num_scbs();
    let mut per_stage = Vec::with_capacity(horizon as usize);
    let mut states = Vec::with_capacity(horizon as usize);
    let mut exact = true;
    for t in 1..=horizon {
        let alive = catalog.alive_at(t);
        let weights: Vec<Cost> = (0..alive as u32).map(|n| trace.count(t, n) as Cost).collect();
        let sizes: Vec<u32> = catalog.contents()[..alive].iter().map(|c| c.size).collect();
        let placed: PlacementResult =
            solve_static_placement(&weights, &sizes, costs, &vec![capacity; m_count], true);
        exact &= placed.exact;
        let cost = crate::cache::serving_cost(&placed.state, &weights, costs);
        per_stage.push(cost);
        states.push(placed.state);
    }
    LowerBoundRun { total: per_stage.iter().sum(), per_stage, states, exact }
}

/// Mutable per-replication policy instance: its cache plus whatever
/// bookkeeping the kind needs.
pub struct PolicyEngine {
    spec: PolicySpec,
    solver: SolverMode,
    caps: ExactCaps,
    cache: CacheState,
    lru: Option<LruBook>,
    /// One-step rank order fitted from stage-1 demand (content ids, most
    /// popular first); later-born contents are appended in birth order.
    onestep_ranks: Vec<u32>,
    zipf_skew: f64,
    placement_exact: bool,
    /// Delta of every executed greedy replacement, for audit.
    pub greedy_deltas: Vec<Cost>,
}

impl PolicyEngine {
    /// `default_solver` applies when the spec carries no override. The
    /// engine starts with empty caches sized for the stage-1 catalogue.
    pub fn new(
        spec: PolicySpec,
        default_solver: SolverMode,
        sizes: Vec<u32>,
        capacities: Vec<u32>,
        zipf_skew: f64,
    ) -> PolicyEngine {
        let solver = match spec.kind {
            PolicyKind::GreedyReplace => SolverMode::Greedy,
            _ => spec.solver.unwrap_or(default_solver),
        };
        let lru = matches!(spec.kind, PolicyKind::LruSingle | PolicyKind::LruMulti)
            .then(|| LruBook::new(sizes.len(), spec.lru_decay));
        PolicyEngine {
            spec,
            solver,
            caps: ExactCaps::default(),
            cache: CacheState::empty(sizes, capacities),
            lru,
            onestep_ranks: Vec::new(),
            zipf_skew,
            placement_exact: true,
            greedy_deltas: Vec::new(),
        }
    }

    pub fn spec(&self) -> &PolicySpec {
        &self.spec
    }

    pub fn solver(&self) -> SolverMode {
        self.solver
    }

    pub fn cache(&self) -> &CacheState {
        &self.cache
    }

    pub fn placement_exact(&self) -> bool {
        self.placement_exact
    }

    /// Whether this policy's trajectory must stay single-copy.
    fn single_copy(&self) -> bool {
        matches!(self.spec.kind, PolicyKind::LruSingle)
            || (self.spec.is_forecast_driven() && self.solver == SolverMode::SingleCopyFlow)
    }

    fn stage_weights(&mut self, ctx: &StageContext) -> Result<Vec<f64>> {
        match self.spec.kind {
            PolicyKind::Myopic => Ok(myopic_weights(ctx.demand_t)),
            PolicyKind::RollingHorizon | PolicyKind::GreedyReplace => rolling_horizon_weights(
                ctx.model,
                ctx.windows,
                ctx.demand_t,
                ctx.t,
                ctx.horizon,
                self.spec.horizon,
            ),
            PolicyKind::OneStep => {
                let p = self.onestep_profile(ctx.demand_t.len())?;
                Ok(one_step_weights(ctx.demand_t, &p, ctx.t, ctx.horizon))
            }
            _ => Err(Error::InvalidParameter(format!(
                "{:?} does not build stage weights",
                self.spec.kind
            ))),
        }
    }

    /// Zipf weights over the fitted rank order, extended to `n` contents.
    fn onestep_profile(&mut self, n: usize) -> Result<Vec<f64>> {
        while self.onestep_ranks.len() < n {
            self.onestep_ranks.push(self.onestep_ranks.len() as u32);
        }
        let p = zipf_popularity(n, self.zipf_skew)?;
        let mut out = vec![0.0; n];
        for (rank, &content) in self.onestep_ranks.iter().take(n).enumerate() {
            out[content as usize] = p[rank];
        }
        Ok(out)
    }

    /// Free first-stage placement from this policy's own stage-1 estimate.
    pub fn place_initial(&mut self, ctx: &StageContext) -> Result<()> {
        debug_assert_eq!(ctx.t, 1);
        self.sync_catalog(ctx);
        let multi_copy = !self.single_copy();
        let weights: Vec<Cost> = match self.spec.kind {
            PolicyKind::Offline | PolicyKind::LruSingle | PolicyKind::LruMulti => {
                // Offline phase: assume Zipf popularity over the published
                // catalogue in rank order, scaled to the observed total.
                let n = ctx.demand_t.len();
                let p = zipf_popularity(n, self.zipf_skew)?;
                let total: f64 = ctx.demand_t.iter().map(|&d| d as f64).sum::<f64>().max(1.0);
                crate::solvers::scale_weights(
                    &p.iter().map(|&v| v * total).collect::<Vec<_>>(),
                )
            }
            PolicyKind::ClairvoyantLb => {
                return Err(Error::InvalidParameter(
                    "the clairvoyant bound is computed by the harness, not staged".into(),
                ))
            }
            _ => {
                // Fit one-step ranks from stage-1 demand before first use.
                if self.spec.kind == PolicyKind::OneStep {
                    let mut ids: Vec<u32> = (0..ctx.demand_t.len() as u32).collect();
                    ids.sort_by_key(|&n| (std::cmp::Reverse(ctx.demand_t[n as usize]), n));
                    self.onestep_ranks = ids;
                }
                crate::solvers::scale_weights(&self.stage_weights(ctx)?)
            }
        };
        let placed = solve_static_placement(
            &weights,
            self.cache.sizes(),
            ctx.costs,
            self.cache.capacities(),
            multi_copy,
        );
        self.placement_exact = placed.exact;
        self.cache = placed.state;
        if let Some(book) = &mut self.lru {
            book.observe(ctx.demand_t);
        }
        Ok(())
    }

    fn sync_catalog(&mut self, ctx: &StageContext) {
        while self.cache.num_contents() < ctx.demand_t.len() {
            let n = self.cache.num_contents();
            self.cache.push_content(ctx.catalog.content(n as u32).size);
        }
        if let Some(book) = &mut self.lru {
            book.grow(ctx.demand_t.len());
        }
    }

    /// Charged stage update for `t >= 2`; returns the executed action.
    pub fn update(&mut self, ctx: &StageContext) -> Result<CacheAction> {
        debug_assert!(ctx.t >= 2);
        self.sync_catalog(ctx);
        let action = match self.spec.kind {
            PolicyKind::Offline => CacheAction::empty(),
            PolicyKind::LruSingle | PolicyKind::LruMulti => {
                let book = self.lru.as_mut().expect("LRU bookkeeping present");
                book.observe(ctx.demand_t);
                let r = self
                    .spec
                    .replacements
                    .unwrap_or_else(|| self.cache.capacities().iter().copied().max().unwrap_or(0));
                lru_update(
                    &self.cache,
                    ctx.demand_t,
                    book.scores(),
                    r,
                    self.spec.kind == PolicyKind::LruSingle,
                )
            }
            PolicyKind::ClairvoyantLb => {
                return Err(Error::InvalidParameter(
                    "the clairvoyant bound is computed by the harness, not staged".into(),
                ))
            }
            _ => {
                let weights = self.stage_weights(ctx)?;
                let problem =
                    StageProblem::from_forecast(&self.cache, ctx.costs, &weights, ctx.gamma);
                match self.solver {
                    SolverMode::Greedy => {
                        let rounds = self.spec.replacements.unwrap_or_else(|| {
                            self.cache.capacities().iter().sum::<u32>()
                        });
                        let outcome = greedy_replace(&problem, rounds);
                        self.greedy_deltas.extend(outcome.executed_deltas.iter());
                        outcome.action
                    }
                    mode => dispatch(&problem, mode, &self.caps, None)?,
                }
            }
        };
        self.cache = self.cache.apply(&action)?;
        Ok(action)
    }
}
