//! Optimization engines for the per-stage cache-update problem.
//!
//! All solvers score a candidate action as
//! `gamma * (#adds + #evicts) + serving_cost(successor, weights)` and share a
//! single [`StageProblem`] description. Weights and `gamma` only need to be
//! expressed in the same units: forecast-based callers scale fractional
//! weights by [`WEIGHT_SCALE`], integer-demand callers pass counts directly.

mod assignment;
mod backward;
mod exact;
pub mod flow;

pub use assignment::solve_single_copy_update;
pub use backward::{backward_induction, backward_induction_capped, BackwardSolution};
pub use exact::{solve_exact_update, solve_exact_update_capped, ExactCaps};
pub use flow::{min_cost_flow, FlowNetwork, FlowResult};

use crate::cache::{serving_cost, update_penalty, CacheAction, CacheState};
use crate::error::Result;
use crate::topology::{Cost, CostMatrix};

/// Fixed-point scale applied to fractional (forecast) weights so solver
/// arithmetic stays in exact integers. Two forecasts closer than
/// `1 / WEIGHT_SCALE` requests are treated as equal.
pub const WEIGHT_SCALE: i64 = 1000;

/// Scales fractional per-content weights to solver integers.
pub fn scale_weights(weights: &[f64]) -> Vec<i64> {
    weights.iter().map(|w| (w * WEIGHT_SCALE as f64).round() as i64).collect()
}

/// One stage-update decision: the previous cache state, the effective
/// per-content demand weights (immediate demand plus any forecast horizon),
/// the delivery costs and the per-change penalty.
#[derive(Clone, Debug)]
pub struct StageProblem<'a> {
    pub prev: &'a CacheState,
    pub weights: Vec<Cost>,
    pub costs: &'a CostMatrix,
    pub gamma: Cost,
}

impl<'a> StageProblem<'a> {
    /// Problem with integer weights; `gamma` must be in the same units.
    pub fn new(prev: &'a CacheState, costs: &'a CostMatrix, weights: Vec<Cost>, gamma: Cost) -> Self {
        debug_assert_eq!(weights.len(), prev.num_contents());
        debug_assert!(gamma >= 0);
        debug_assert!(weights.iter().all(|&w| w >= 0));
        StageProblem { prev, weights, costs, gamma }
    }

    /// Problem with fractional weights, scaled by [`WEIGHT_SCALE`] together
    /// with `gamma` (given in cost units).
    pub fn from_forecast(
        prev: &'a CacheState,
        costs: &'a CostMatrix,
        weights: &[f64],
        gamma: Cost,
    ) -> Self {
        StageProblem::new(prev, costs, scale_weights(weights), gamma * WEIGHT_SCALE)
    }

    pub fn capacities(&self) -> &[u32] {
        self.prev.capacities()
    }

    /// Stage objective of applying `action` to the previous state.
    pub fn score(&self, action: &CacheAction) -> Result<Cost> {
        let next = self.prev.apply(action)?;
        Ok(update_penalty(action, self.gamma) + serving_cost(&next, &self.weights, self.costs))
    }
}

/// Result of a one-shot placement; `exact` is false when the greedy
/// copy-augmentation fallback produced it.
#[derive(Clone, Debug)]
pub struct PlacementResult {
    pub state: CacheState,
    pub exact: bool,
}

/// Optimal (or labeled-heuristic) one-shot placement minimizing the serving
/// cost of `weights` under the capacity constraints, starting from empty
/// caches and paying no update penalty.
///
/// Routes: the transportation solver when `multi_copy` is false and sizes
/// are unit; the exact stage solver when `multi_copy` is true and the
/// instance fits its caps; greedy copy-augmentation otherwise.
pub fn solve_static_placement(
    weights: &[Cost],
    sizes: &[u32],
    costs: &CostMatrix,
    capacities: &[u32],
    multi_copy: bool,
) -> PlacementResult {
    let empty = CacheState::empty(sizes.to_vec(), capacities.to_vec());
    let problem = StageProblem::new(&empty, costs, weights.to_vec(), 0);
    if multi_copy {
        if let Ok(action) = solve_exact_update(&problem, true) {
            let state = empty.apply(&action).expect("solver actions are feasible");
            return PlacementResult { state, exact: true };
        }
    } else if sizes.iter().all(|&v| v == 1) {
        if let Ok(action) = solve_single_copy_update(&problem) {
            let state = empty.apply(&action).expect("solver actions are feasible");
            return PlacementResult { state, exact: true };
        }
    }
    PlacementResult { state: greedy_placement(weights, sizes, costs, capacities, multi_copy), exact: false }
}

/// Lazy-greedy copy augmentation: repeatedly add the (content, SCBS) copy
/// with the largest marginal serving-cost reduction until no copy fits or
/// no copy helps. Marginals only shrink as copies accumulate, so a stale
/// heap entry is refreshed and reinserted instead of rescanning.
pub fn greedy_placement(
    weights: &[Cost],
    sizes: &[u32],
    costs: &CostMatrix,
    capacities: &[u32],
    multi_copy: bool,
) -> CacheState {
    use std::collections::BinaryHeap;

    let mut state = CacheState::empty(sizes.to_vec(), capacities.to_vec());
    let m_count = costs.num_scbs();
    let users = costs.num_users();

    let marginal = |state: &CacheState, n: u32, m: usize| -> Cost {
        let owners = state.owners(n);
        let mut gain = 0;
        for u in 0..users {
            let before = costs.best_source_cost(owners, u);
            let with = costs.cost(m, u).min(before);
            gain += before - with;
        }
        weights[n as usize] * gain
    };

    // Heap entries carry the copy count of the content at evaluation time so
    // stale entries are recognized cheaply.
    type Entry = (Cost, std::cmp::Reverse<(u32, usize)>, usize);
    let mut heap: BinaryHeap<Entry> = BinaryHeap::new();
    for n in 0..weights.len() as u32 {
        for m in 1..=m_count {
            let gain = marginal(&state, n, m);
            if gain > 0 {
                heap.push((gain, std::cmp::Reverse((n, m)), 0));
            }
        }
    }
    while let Some((gain, std::cmp::Reverse((n, m)), version)) = heap.pop() {
        if gain <= 0 {
            break;
        }
        if state.contains(n, m) || state.used(m) + sizes[n as usize] > state.capacity(m) {
            continue;
        }
        if !multi_copy && state.copies(n) > 0 {
            continue;
        }
        let current_version = state.copies(n);
        if version != current_version {
            let fresh = marginal(&state, n, m);
            if fresh > 0 {
                heap.push((fresh, std::cmp::Reverse((n, m)), current_version));
            }
            continue;
        }
        state.insert_unchecked(n, m);
    }
    state
}
