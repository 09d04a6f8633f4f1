//! Greedy replacement heuristic for the stage update.
//!
//! Contents are sorted by decreasing effective weight; round `i` examines
//! the `i`-th content as an addition candidate at every SCBS. The cost delta
//! of adding candidate `i` at SCBS `k` is
//! `delta(a_ik) = gamma + w_i * [serve(owners_i + k) - serve(owners_i)]`,
//! the delta of evicting a resident `j` is
//! `delta(d_jk) = gamma + w_j * [serve(owners_j - k) - serve(owners_j)]`,
//! both aware of copies elsewhere in the network. The cheapest combined
//! replacement (or a pure addition into spare capacity) executes only when
//! its delta is strictly negative, so each executed change lowers the staged
//! objective. At most one change per round; `rounds` bounds the total.

use crate::cache::CacheAction;
use crate::solvers::StageProblem;
use crate::topology::{Cost, CostMatrix};

/// Action produced by the heuristic plus the delta of every executed change
/// (all strictly negative by construction).
#[derive(Clone, Debug)]
pub struct GreedyOutcome {
    pub action: CacheAction,
    pub executed_deltas: Vec<Cost>,
}

/// Per-unit-demand serving cost of a content with the given owner set.
fn per_unit_serve(costs: &CostMatrix, owners: &[usize]) -> Cost {
    (0..costs.num_users()).map(|u| costs.best_source_cost(owners, u)).sum()
}

fn serve_with_extra(costs: &CostMatrix, owners: &[usize], extra: usize) -> Cost {
    (0..costs.num_users())
        .map(|u| costs.best_source_cost(owners, u).min(costs.cost(extra, u)))
        .sum()
}

fn serve_without(costs: &CostMatrix, owners: &[usize], removed: usize) -> Cost {
    let mut best_total = 0;
    for u in 0..costs.num_users() {
        let mut best = costs.mcbs_cost(u);
        for &m in owners {
            if m != removed && costs.cost(m, u) < best {
                best = costs.cost(m, u);
            }
        }
        best_total += best;
    }
    best_total
}

/// Runs the replacement heuristic for up to `rounds` rounds.
pub fn greedy_replace(p: &StageProblem, rounds: u32) -> GreedyOutcome {
    let mut state = p.prev.clone();
    let costs = p.costs;
    let m_count = costs.num_scbs();
    let sizes = p.prev.sizes().to_vec();

    let mut order: Vec<u32> = (0..p.weights.len() as u32).collect();
    order.sort_by_key(|&n| (std::cmp::Reverse(p.weights[n as usize]), n));

    let mut executed_deltas = Vec::new();
    for &candidate in order.iter().take(rounds as usize) {
        let w_i = p.weights[candidate as usize];
        let owners_i = state.owners(candidate).to_vec();
        let base_i = per_unit_serve(costs, &owners_i);
        // (delta, evicted content or None, SCBS)
        let mut best: Option<(Cost, Option<u32>, usize)> = None;
        for k in 1..=m_count {
            if owners_i.contains(&k) {
                continue;
            }
            let delta_add = p.gamma + w_i * (serve_with_extra(costs, &owners_i, k) - base_i);
            let spare = state.capacity(k) - state.used(k);
            if spare >= sizes[candidate as usize] {
                let entry = (delta_add, None, k);
                if best.is_none_or(|b| entry.0 < b.0) {
                    best = Some(entry);
                }
            }
            for resident in state.cached_at(k) {
                if resident == candidate {
                    continue;
                }
                if state.used(k) - sizes[resident as usize] + sizes[candidate as usize]
                    > state.capacity(k)
                {
                    continue;
                }
                let owners_j = state.owners(resident);
                let w_j = p.weights[resident as usize];
                let delta_evict = p.gamma
                    + w_j * (serve_without(costs, owners_j, k) - per_unit_serve(costs, owners_j));
                let entry = (delta_add + delta_evict, Some(resident), k);
                if best.is_none_or(|b| entry.0 < b.0) {
                    best = Some(entry);
                }
            }
        }
        if let Some((delta, evicted, k)) = best {
            if delta < 0 {
                if let Some(j) = evicted {
                    state.remove_unchecked(j, k);
                }
                state.insert_unchecked(candidate, k);
                executed_deltas.push(delta);
            }
        }
    }
    GreedyOutcome { action: CacheAction::diff(p.prev, &state), executed_deltas }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::CacheState;
    use crate::topology::GridTopology;

    #[test]
    fn zero_rounds_yield_empty_action() {
        let costs = GridTopology::build_grid(1, 2, 2, 20).unwrap().cost_matrix();
        let prev = CacheState::unit(3, 2, 1);
        let p = StageProblem::new(&prev, &costs, vec![5, 3, 1], 10);
        let out = greedy_replace(&p, 0);
        assert!(out.action.is_empty());
        assert!(out.executed_deltas.is_empty());
    }

    #[test]
    fn huge_gamma_blocks_every_replacement() {
        let costs = GridTopology::build_grid(1, 2, 2, 20).unwrap().cost_matrix();
        let mut prev = CacheState::unit(3, 2, 1);
        prev.insert_unchecked(2, 1);
        prev.insert_unchecked(1, 2);
        let p = StageProblem::new(&prev, &costs, vec![50, 3, 1], 1_000_000);
        let out = greedy_replace(&p, 3);
        assert!(out.action.is_empty());
    }

    #[test]
    fn hand_evaluated_replacement() {
        // One SCBS, one user homed there (local cost 0, MCBS cost 20),
        // cached content weight 1, candidate weight 100, gamma 100:
        // delta(add) = 100 + 100*(0 - 20) = -1900,
        // delta(evict) = 100 + 1*(20 - 0) = 120, total -1780 < 0.
        let topo =
            GridTopology::build_grid(1, 1, 2, 20).unwrap().with_user_map(vec![1]).unwrap();
        let costs = topo.cost_matrix();
        let mut prev = CacheState::unit(2, 1, 1);
        prev.insert_unchecked(1, 1);
        let p = StageProblem::new(&prev, &costs, vec![100, 1], 100);
        let out = greedy_replace(&p, 2);
        assert_eq!(out.executed_deltas, vec![-1780]);
        let next = prev.apply(&out.action).unwrap();
        assert!(next.contains(0, 1));
        assert!(!next.contains(1, 1));
    }

    #[test]
    fn executed_deltas_are_strictly_negative_and_feasible() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..200 {
            let cols = rng.random_range(1..=3);
            let costs = GridTopology::build_grid(1, cols, 2, 20).unwrap().cost_matrix();
            let n = rng.random_range(1..=6);
            let b = rng.random_range(1..=2);
            let mut prev = CacheState::unit(n, cols, b);
            for m in 1..=cols {
                for c in 0..n as u32 {
                    if prev.used(m) < b && rng.random_bool(0.5) {
                        prev.insert_unchecked(c, m);
                    }
                }
            }
            let weights: Vec<Cost> = (0..n).map(|_| rng.random_range(0..=20)).collect();
            let gamma = *[0, 20, 100].choose(&mut rng).unwrap();
            let p = StageProblem::new(&prev, &costs, weights, gamma);
            let rounds = (cols as u32) * b;
            let out = greedy_replace(&p, rounds);
            assert!(out.executed_deltas.iter().all(|&d| d < 0));
            assert!(prev.is_feasible(&out.action));
            // Executed changes never worsen the staged objective.
            let score_after = p.score(&out.action).unwrap();
            let score_before = p.score(&CacheAction::empty()).unwrap();
            assert!(score_after <= score_before);
        }
    }
}
