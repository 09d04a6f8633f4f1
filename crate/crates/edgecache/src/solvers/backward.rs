//! Exact finite-horizon backward induction over the full cache state space.
//!
//! Enumerates every feasible cache configuration (unit sizes, uniform
//! capacity), computes the cost-to-go `V_t` for each state and stage with
//! `V_T = 0`, and recovers the optimal policy. The first-stage placement is
//! free of charge; every later transition pays `gamma` per cache change.
//! Only usable on tiny instances: the state count is
//! `(sum_{l<=b} C(N,l))^M` and each stage scans all state pairs.

use rayon::prelude::*;

use crate::cache::{count_states, CacheState};
use crate::error::{Error, Result};
use crate::topology::{Cost, CostMatrix};

/// Default cap on the number of enumerated states.
pub const DEFAULT_STATE_CAP: u128 = 100_000;

/// Optimal value, tables and policy from backward induction.
#[derive(Clone, Debug)]
pub struct BackwardSolution {
    /// Optimal total cost over the horizon.
    pub v0: Cost,
    /// `values[t-1][s]` is `V_t(s)`, the optimal cost of stages `t+1..=T`
    /// when the cache holds state `s` during stage `t`. `values[T-1]` is all
    /// zeros (the boundary condition).
    pub values: Vec<Vec<Cost>>,
    /// Optimal first-stage state index.
    pub initial_state: usize,
    /// `policy[t-2][s]` is the optimal successor state for stage `t` when
    /// the cache held `s` during stage `t-1` (for `t` in `2..=T`).
    pub policy: Vec<Vec<usize>>,
    subsets: Vec<Vec<u32>>,
    num_scbs: usize,
    num_contents: usize,
    capacity: u32,
}

impl BackwardSolution {
    pub fn num_states(&self) -> usize {
        self.subsets.len().pow(self.num_scbs as u32)
    }

    /// Decodes a state index into a [`CacheState`].
    pub fn state(&self, mut idx: usize) -> CacheState {
        let k = self.subsets.len();
        let mut state = CacheState::unit(self.num_contents, self.num_scbs, self.capacity);
        for m in 1..=self.num_scbs {
            for &n in &self.subsets[idx % k] {
                state.insert_unchecked(n, m);
            }
            idx /= k;
        }
        state
    }

    /// True when state `a` holds every copy state `b` holds.
    pub fn contains(&self, a: usize, b: usize) -> bool {
        let k = self.subsets.len();
        let (mut a, mut b) = (a, b);
        for _ in 0..self.num_scbs {
            let sa = &self.subsets[a % k];
            let sb = &self.subsets[b % k];
            if !sb.iter().all(|n| sa.contains(n)) {
                return false;
            }
            a /= k;
            b /= k;
        }
        true
    }

    /// The optimal state trajectory `s_1, ..., s_T`.
    pub fn optimal_trajectory(&self) -> Vec<usize> {
        let horizon = self.values.len();
        let mut path = Vec::with_capacity(horizon);
        let mut s = self.initial_state;
        path.push(s);
        for t in 2..=horizon {
            s = self.policy[t - 2][s];
            path.push(s);
        }
        path
    }
}

/// [`backward_induction_capped`] with the default state cap.
pub fn backward_induction(
    stage_weights: &[Vec<Cost>],
    num_contents: usize,
    capacity: u32,
    costs: &CostMatrix,
    gamma: Cost,
) -> Result<BackwardSolution> {
    backward_induction_capped(stage_weights, num_contents, capacity, costs, gamma, DEFAULT_STATE_CAP)
}

/// Solves the finite-horizon problem exactly for a known (deterministic)
/// demand sequence. `stage_weights[t-1]` holds the per-content demand of
/// stage `t`; contents have unit size and every SCBS has capacity
/// `capacity`.
pub fn backward_induction_capped(
    stage_weights: &[Vec<Cost>],
    num_contents: usize,
    capacity: u32,
    costs: &CostMatrix,
    gamma: Cost,
    state_cap: u128,
) -> Result<BackwardSolution> {
    let horizon = stage_weights.len();
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least one stage".into()));
    }
    if stage_weights.iter().any(|w| w.len() != num_contents) {
        return Err(Error::InvalidParameter("every stage needs one weight per content".into()));
    }
    let m_count = costs.num_scbs();
    let total = count_states(num_contents as u64, m_count as u32, capacity as u64)?;
    if total > state_cap {
        return Err(Error::InstanceTooLarge(format!(
            "{total} states exceed the cap of {state_cap}"
        )));
    }

    // Per-SCBS subsets of at most `capacity` contents, then global states as
    // mixed-radix tuples over them.
    let subsets = enumerate_subsets(num_contents, capacity as usize);
    let k = subsets.len();
    let num_states = (total as usize).max(1);

    // Owner lists per (state, content) are implicit; serving cost per state
    // is evaluated directly from the subset tuple.
    let serve = |state: usize, weights: &[Cost]| -> Cost {
        let users = costs.num_users();
        let mut owners: Vec<Vec<usize>> = vec![Vec::new(); num_contents];
        let mut idx = state;
        for m in 1..=m_count {
            for &n in &subsets[idx % k] {
                owners[n as usize].push(m);
            }
            idx /= k;
        }
        let mut cost = 0;
        for (n, w) in weights.iter().enumerate() {
            if *w == 0 {
                continue;
            }
            let mut per_unit = 0;
            for u in 0..users {
                per_unit += costs.best_source_cost(&owners[n], u);
            }
            cost += w * per_unit;
        }
        cost
    };

    // Hamming distance between per-SCBS subsets, precomputed.
    let mut subset_dist = vec![0u32; k * k];
    for a in 0..k {
        for b in 0..k {
            let sa = &subsets[a];
            let sb = &subsets[b];
            let common = sa.iter().filter(|n| sb.contains(n)).count();
            subset_dist[a * k + b] = (sa.len() + sb.len() - 2 * common) as u32;
        }
    }
    let state_dist = |mut a: usize, mut b: usize| -> Cost {
        let mut d = 0u32;
        for _ in 0..m_count {
            d += subset_dist[(a % k) * k + (b % k)];
            a /= k;
            b /= k;
        }
        d as Cost
    };

    let mut values: Vec<Vec<Cost>> = vec![Vec::new(); horizon];
    values[horizon - 1] = vec![0; num_states];
    let mut policy: Vec<Vec<usize>> = vec![Vec::new(); horizon.saturating_sub(1)];

    for t in (2..=horizon).rev() {
        let weights = &stage_weights[t - 1];
        let stage_serve: Vec<Cost> = (0..num_states).map(|s| serve(s, weights)).collect();
        let future = &values[t - 1];
        // Score of landing in s' at stage t, before the transition penalty.
        let landing: Vec<Cost> = (0..num_states).map(|s| stage_serve[s] + future[s]).collect();
        let results: Vec<(Cost, usize)> = (0..num_states)
            .into_par_iter()
            .map(|s| {
                let mut best = Cost::MAX;
                let mut best_succ = s;
                let mut best_changes = Cost::MAX;
                for succ in 0..num_states {
                    let changes = state_dist(s, succ);
                    let cost = gamma * changes + landing[succ];
                    if cost < best || (cost == best && changes < best_changes) {
                        best = cost;
                        best_succ = succ;
                        best_changes = changes;
                    }
                }
                (best, best_succ)
            })
            .collect();
        values[t - 2] = results.iter().map(|r| r.0).collect();
        policy[t - 2] = results.iter().map(|r| r.1).collect();
    }

    // Free first-stage placement.
    let first_weights = &stage_weights[0];
    let mut v0 = Cost::MAX;
    let mut initial_state = 0;
    for s in 0..num_states {
        let cost = serve(s, first_weights) + values[0][s];
        if cost < v0 {
            v0 = cost;
            initial_state = s;
        }
    }

    Ok(BackwardSolution {
        v0,
        values,
        initial_state,
        policy,
        subsets,
        num_scbs: m_count,
        num_contents,
        capacity,
    })
}

fn enumerate_subsets(n: usize, b: usize) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = vec![Vec::new()];
    let mut frontier: Vec<Vec<u32>> = vec![Vec::new()];
    for _ in 0..b.min(n) {
        let mut next = Vec::new();
        for set in &frontier {
            let start = set.last().map_or(0, |&x| x + 1);
            for item in start..n as u32 {
                let mut bigger = set.clone();
                bigger.push(item);
                next.push(bigger);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}
