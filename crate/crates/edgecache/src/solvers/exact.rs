//! Exact stage-update solver.
//!
//! The stage objective decomposes per content once each content's owner set
//! is fixed: serving savings are `w_n * save(owners)` and the penalty is
//! `gamma` per owner-set change, while per-SCBS capacities are the only
//! coupling. The solver therefore branches on owner sets content by content
//! and folds partial solutions that reach the same used-capacity vector,
//! keeping only the dominant one. This enumerates every feasible successor
//! state implicitly and exactly, at a cost bounded by
//! `contents x capacity vectors x owner sets` instead of the raw state count.

use crate::cache::CacheAction;
use crate::error::{Error, Result};
use crate::solvers::StageProblem;
use crate::topology::Cost;

/// Size guards for [`solve_exact_update_capped`]. The defaults keep the
/// choice table and the transition work bounded irrespective of demand
/// values.
#[derive(Clone, Copy, Debug)]
pub struct ExactCaps {
    /// Maximum number of capacity-usage vectors, `prod_m (b_m + 1)`.
    pub max_capacity_states: u128,
    /// Maximum `contents x capacity vectors` product (memory guard for the
    /// reconstruction table).
    pub max_table: u128,
    /// Maximum `contents x capacity vectors x owner sets` product (time
    /// guard).
    pub max_transitions: u128,
    /// Maximum SCBS count (owner sets are enumerated as bitmasks).
    pub max_scbs: usize,
}

impl Default for ExactCaps {
    fn default() -> Self {
        ExactCaps {
            max_capacity_states: 1_000_000,
            max_table: 10_000_000,
            max_transitions: 20_000_000,
            max_scbs: 16,
        }
    }
}

#[derive(Clone, Copy)]
struct Cell {
    gain: Cost,
    changes: u32,
    reachable: bool,
}

const DEAD: Cell = Cell { gain: Cost::MIN, changes: u32::MAX, reachable: false };

/// Exactly optimal stage update with default caps; see
/// [`solve_exact_update_capped`].
pub fn solve_exact_update(p: &StageProblem, multi_copy: bool) -> Result<CacheAction> {
    solve_exact_update_capped(p, multi_copy, &ExactCaps::default())
}

/// Finds an action minimizing `gamma * changes + serving_cost(successor)`.
///
/// With `multi_copy` false, owner sets are restricted to at most one SCBS
/// per content (the previous state must then be single-copy as well for the
/// result to stay within the restricted class). Ties are broken toward the
/// fewest cache changes, then by the fixed scan order (contents ascending,
/// owner masks ascending), which makes the result deterministic.
pub fn solve_exact_update_capped(
    p: &StageProblem,
    multi_copy: bool,
    caps: &ExactCaps,
) -> Result<CacheAction> {
    let m_count = p.costs.num_scbs();
    let n_count = p.weights.len();
    if m_count > caps.max_scbs || m_count > 20 {
        return Err(Error::InstanceTooLarge(format!(
            "{m_count} SCBSs exceed the exact solver's limit of {}",
            caps.max_scbs.min(20)
        )));
    }
    let capacities = p.capacities();
    let mut states: u128 = 1;
    for &b in capacities {
        states = states.saturating_mul(b as u128 + 1);
        if states > caps.max_capacity_states {
            return Err(Error::InstanceTooLarge(format!(
                "capacity-state space exceeds {}",
                caps.max_capacity_states
            )));
        }
    }
    if states.saturating_mul(n_count as u128) > caps.max_table {
        return Err(Error::InstanceTooLarge(format!(
            "contents x capacity vectors exceeds {}",
            caps.max_table
        )));
    }
    let full_mask: u32 = (1u32 << m_count) - 1;
    let masks: Vec<u32> = if multi_copy {
        (0..=full_mask).collect()
    } else {
        std::iter::once(0).chain((0..m_count).map(|m| 1u32 << m)).collect()
    };
    if states.saturating_mul(n_count as u128).saturating_mul(masks.len() as u128)
        > caps.max_transitions
    {
        return Err(Error::InstanceTooLarge(format!(
            "transition count exceeds {}",
            caps.max_transitions
        )));
    }
    let num_states = states as usize;

    // Mixed-radix layout of used-capacity vectors.
    let mut stride = vec![0usize; m_count];
    let mut acc = 1usize;
    for m in 0..m_count {
        stride[m] = acc;
        acc *= capacities[m] as usize + 1;
    }

    // Per-unit-demand saving of each owner set versus serving from the MCBS.
    let users = p.costs.num_users();
    let mut save = vec![0 as Cost; full_mask as usize + 1];
    for mask in 1..=full_mask {
        let mut total = 0;
        for u in 0..users {
            let mut best = p.costs.mcbs_cost(u);
            let mut bits = mask;
            while bits != 0 {
                let m = bits.trailing_zeros() as usize + 1;
                bits &= bits - 1;
                best = best.min(p.costs.cost(m, u));
            }
            total += p.costs.mcbs_cost(u) - best;
        }
        save[mask as usize] = total;
    }

    let prev_masks: Vec<u32> = (0..n_count as u32)
        .map(|n| p.prev.owners(n).iter().fold(0u32, |acc, &m| acc | (1 << (m - 1))))
        .collect();
    let sizes = p.prev.sizes();

    let mut best = vec![DEAD; num_states];
    best[0] = Cell { gain: 0, changes: 0, reachable: true };
    let mut next = vec![DEAD; num_states];
    // Chosen owner mask per (content, resulting capacity state).
    let mut choice = vec![0u32; n_count * num_states];

    for n in 0..n_count {
        let w = p.weights[n];
        let v = sizes[n] as usize;
        let prev_mask = prev_masks[n];
        next.fill(DEAD);
        let mut used = vec![0u32; m_count];
        for s in 0..num_states {
            if best[s].reachable {
                let cur = best[s];
                for &mask in &masks {
                    if !multi_copy && !mask.is_power_of_two() && mask != 0 {
                        continue;
                    }
                    // Capacity feasibility and target state.
                    let mut target = s;
                    let mut fits = true;
                    let mut bits = mask;
                    while bits != 0 {
                        let m = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        if used[m] as usize + v > capacities[m] as usize {
                            fits = false;
                            break;
                        }
                        target += v * stride[m];
                    }
                    if !fits {
                        continue;
                    }
                    let ham = (mask ^ prev_mask).count_ones();
                    let gain = cur.gain + w * save[mask as usize] - p.gamma * ham as Cost;
                    let changes = cur.changes + ham;
                    let cell = &mut next[target];
                    if !cell.reachable
                        || gain > cell.gain
                        || (gain == cell.gain && changes < cell.changes)
                    {
                        *cell = Cell { gain, changes, reachable: true };
                        choice[n * num_states + target] = mask;
                    }
                }
            }
            // Advance the used-capacity odometer.
            for m in 0..m_count {
                used[m] += 1;
                if used[m] <= capacities[m] {
                    break;
                }
                used[m] = 0;
            }
        }
        std::mem::swap(&mut best, &mut next);
    }

    let mut best_state = 0;
    let mut best_cell = DEAD;
    for s in 0..num_states {
        let c = best[s];
        if c.reachable
            && (!best_cell.reachable
                || c.gain > best_cell.gain
                || (c.gain == best_cell.gain && c.changes < best_cell.changes))
        {
            best_cell = c;
            best_state = s;
        }
    }

    // Walk the choices backwards and diff against the previous placement.
    let mut adds = Vec::new();
    let mut evicts = Vec::new();
    let mut s = best_state;
    for n in (0..n_count).rev() {
        let mask = choice[n * num_states + s];
        let v = sizes[n] as usize;
        let mut bits = mask;
        while bits != 0 {
            let m = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            s -= v * stride[m];
        }
        let added = mask & !prev_masks[n];
        let removed = prev_masks[n] & !mask;
        let mut bits = added;
        while bits != 0 {
            let m = bits.trailing_zeros() as usize + 1;
            bits &= bits - 1;
            adds.push((n as u32, m));
        }
        let mut bits = removed;
        while bits != 0 {
            let m = bits.trailing_zeros() as usize + 1;
            bits &= bits - 1;
            evicts.push((n as u32, m));
        }
    }
    debug_assert_eq!(s, 0);
    Ok(CacheAction::new(adds, evicts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::CacheState;
    use crate::topology::GridTopology;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_gamma_single_scbs_caches_top_weights() {
        let topo = GridTopology::build_grid(1, 1, 2, 20).unwrap();
        let costs = topo.cost_matrix();
        let prev = CacheState::unit(5, 1, 2);
        let p = StageProblem::new(&prev, &costs, vec![1, 9, 4, 7, 2], 0);
        let action = solve_exact_update(&p, true).unwrap();
        let next = prev.apply(&action).unwrap();
        assert!(next.contains(1, 1));
        assert!(next.contains(3, 1));
        assert_eq!(next.total_cached(), 2);
    }

    #[test]
    fn already_optimal_state_yields_empty_action() {
        let topo = GridTopology::build_grid(1, 1, 2, 20).unwrap();
        let costs = topo.cost_matrix();
        let mut prev = CacheState::unit(3, 1, 1);
        prev.insert_unchecked(1, 1);
        let p = StageProblem::new(&prev, &costs, vec![1, 9, 4], 50);
        let action = solve_exact_update(&p, true).unwrap();
        assert!(action.is_empty());
    }

    #[test]
    fn never_worse_than_empty_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let cols = rng.random_range(1..=3);
            let costs = GridTopology::build_grid(1, cols, 2, 20).unwrap().cost_matrix();
            let n = rng.random_range(1..=5);
            let b = rng.random_range(1..=2);
            // The single-copy mode presumes a single-copy previous state
            // (keeping the cache must stay within the restricted class).
            let multi_copy = rng.random_bool(0.5);
            let mut prev = CacheState::unit(n, cols, b);
            for m in 1..=cols {
                for c in 0..n as u32 {
                    let allowed = multi_copy || prev.copies(c) == 0;
                    if allowed && prev.used(m) < b && rng.random_bool(0.4) {
                        prev.insert_unchecked(c, m);
                    }
                }
            }
            let weights: Vec<Cost> = (0..n).map(|_| rng.random_range(0..=9)).collect();
            let gamma = *[0, 10, 50].choose(&mut rng).unwrap();
            let p = StageProblem::new(&prev, &costs, weights, gamma);
            let action = solve_exact_update(&p, multi_copy).unwrap();
            assert!(prev.is_feasible(&action));
            assert!(p.score(&action).unwrap() <= p.score(&CacheAction::empty()).unwrap());
        }
    }

    #[test]
    fn instance_too_large_is_reported() {
        let costs = GridTopology::build_grid(1, 3, 2, 20).unwrap().cost_matrix();
        let prev = CacheState::unit(4, 3, 2);
        let p = StageProblem::new(&prev, &costs, vec![1; 4], 0);
        let caps = ExactCaps { max_capacity_states: 8, ..ExactCaps::default() };
        assert!(matches!(
            solve_exact_update_capped(&p, true, &caps),
            Err(Error::InstanceTooLarge(_))
        ));
    }
}
