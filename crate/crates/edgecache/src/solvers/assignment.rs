//! Single-copy stage update as a transportation problem.
//!
//! When every content may be cached in at most one SCBS, the delivery cost
//! has the closed form `sum_u [c_0^u + (c_m^u - c_0^u) x_nm]`, so the stage
//! update reduces to assigning each content to one SCBS or to "uncached".
//! Assigning content `n` to SCBS `m` is worth `w_n * s_m` in serving savings
//! (`s_m = sum_u (c_0^u - c_m^u)`) and costs `gamma` per cache change: zero
//! changes if `n` already sits at `m`, one if `n` was uncached, two if it
//! moves between SCBSs. Solved exactly as a min-cost flow; arc costs are
//! scaled by a constant larger than the maximum possible change count so the
//! flow also minimizes the number of changes among cost-optimal solutions.

use crate::cache::CacheAction;
use crate::error::{Error, Result};
use crate::solvers::flow::{min_cost_flow, FlowNetwork};
use crate::solvers::StageProblem;

/// Exactly optimal single-copy stage update.
///
/// Requires unit content sizes and a single-copy previous state.
pub fn solve_single_copy_update(p: &StageProblem) -> Result<CacheAction> {
    let n_count = p.weights.len();
    let m_count = p.costs.num_scbs();
    if p.prev.sizes().iter().any(|&v| v != 1) {
        return Err(Error::NonUnitSize);
    }
    if let Some(n) = (0..n_count as u32).find(|&n| p.prev.copies(n) > 1) {
        return Err(Error::MultiCopyPrevState(n));
    }

    // Secondary objective: fewest cache changes. Each content contributes at
    // most two changes, so scaling primary costs by `2N + 1` keeps the two
    // criteria lexicographic.
    let tie = 2 * n_count as i64 + 1;
    let savings: Vec<i64> = (1..=m_count).map(|m| p.costs.single_copy_saving(m)).collect();

    // Nodes: source, contents, SCBSs, uncached pool, sink.
    let source = 0;
    let content_node = |n: usize| 1 + n;
    let scbs_node = |m: usize| 1 + n_count + (m - 1);
    let uncached = 1 + n_count + m_count;
    let sink = uncached + 1;
    let mut net = FlowNetwork::new(sink + 1);

    for n in 0..n_count {
        net.add_arc(source, content_node(n), 1, 0);
    }
    let mut placement_arcs = vec![vec![0usize; m_count + 1]; n_count];
    for n in 0..n_count {
        let home = p.prev.owners(n as u32).first().copied();
        for m in 1..=m_count {
            let moves: i64 = match home {
                Some(h) if h == m => 0,
                Some(_) => 2,
                None => 1,
            };
            let cost = tie * (p.gamma * moves - p.weights[n] * savings[m - 1]) + moves;
            placement_arcs[n][m] = net.add_arc(content_node(n), scbs_node(m), 1, cost);
        }
        let evict: i64 = if home.is_some() { 1 } else { 0 };
        placement_arcs[n][0] =
            net.add_arc(content_node(n), uncached, 1, tie * (p.gamma * evict) + evict);
    }
    for m in 1..=m_count {
        net.add_arc(scbs_node(m), sink, p.prev.capacity(m) as i64, 0);
    }
    net.add_arc(uncached, sink, n_count as i64, 0);

    let result = min_cost_flow(&net, source, sink, n_count as i64)?;

    let mut adds = Vec::new();
    let mut evicts = Vec::new();
    for n in 0..n_count {
        let home = p.prev.owners(n as u32).first().copied();
        let target = (1..=m_count).find(|&m| result.flows[placement_arcs[n][m]] > 0);
        match (home, target) {
            (Some(h), Some(t)) if h != t => {
                evicts.push((n as u32, h));
                adds.push((n as u32, t));
            }
            (Some(h), None) => evicts.push((n as u32, h)),
            (None, Some(t)) => adds.push((n as u32, t)),
            _ => {}
        }
    }
    Ok(CacheAction::new(adds, evicts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::{CacheAction, CacheState};
    use crate::solvers::solve_exact_update;
    use crate::topology::{Cost, GridTopology};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dominant_gamma_freezes_the_cache() {
        let costs = GridTopology::build_grid(1, 2, 2, 20).unwrap().cost_matrix();
        let mut prev = CacheState::unit(3, 2, 1);
        prev.insert_unchecked(2, 1);
        // gamma far above any possible saving.
        let p = StageProblem::new(&prev, &costs, vec![5, 4, 1], 10_000);
        let action = solve_single_copy_update(&p).unwrap();
        assert!(action.is_empty());
    }

    #[test]
    fn zero_gamma_from_empty_matches_exact_solver() {
        let costs = GridTopology::build_grid(1, 2, 2, 20).unwrap().cost_matrix();
        let prev = CacheState::unit(4, 2, 1);
        let weights: Vec<Cost> = vec![7, 3, 9, 1];
        let p = StageProblem::new(&prev, &costs, weights, 0);
        let flow_action = solve_single_copy_update(&p).unwrap();
        let exact_action = solve_exact_update(&p, false).unwrap();
        assert_eq!(p.score(&flow_action).unwrap(), p.score(&exact_action).unwrap());
        // The two most valuable contents get the two slots.
        let next = prev.apply(&flow_action).unwrap();
        assert_eq!(next.copies(2), 1);
        assert_eq!(next.copies(0), 1);
    }

    #[test]
    fn rejects_non_unit_sizes_and_multi_copy_states() {
        let costs = GridTopology::build_grid(1, 2, 2, 20).unwrap().cost_matrix();
        let fat = CacheState::empty(vec![2, 1], vec![2, 2]);
        let p = StageProblem::new(&fat, &costs, vec![1, 1], 0);
        assert!(matches!(solve_single_copy_update(&p), Err(Error::NonUnitSize)));

        let mut dup = CacheState::unit(2, 2, 1);
        dup.insert_unchecked(0, 1);
        dup.insert_unchecked(0, 2);
        let p = StageProblem::new(&dup, &costs, vec![1, 1], 0);
        assert!(matches!(solve_single_copy_update(&p), Err(Error::MultiCopyPrevState(0))));
    }

    #[test]
    fn matches_exact_solver_objective_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..500 {
            let cols = rng.random_range(1..=2);
            let costs = GridTopology::build_grid(1, cols, 2, 20).unwrap().cost_matrix();
            let n = rng.random_range(1..=6);
            let b = rng.random_range(1..=2);
            let mut prev = CacheState::unit(n, cols, b);
            for content in 0..n as u32 {
                if rng.random_bool(0.5) {
                    let m = rng.random_range(1..=cols);
                    if prev.used(m) < b {
                        prev.insert_unchecked(content, m);
                    }
                }
            }
            let weights: Vec<Cost> = (0..n).map(|_| rng.random_range(0..=9)).collect();
            let gamma = *[0, 50, 100].choose(&mut rng).unwrap();
            let p = StageProblem::new(&prev, &costs, weights, gamma);
            let flow_action = solve_single_copy_update(&p).unwrap();
            let exact_action = solve_exact_update(&p, false).unwrap();
            assert!(prev.is_feasible(&flow_action));
            let next = prev.apply(&flow_action).unwrap();
            assert!(next.is_single_copy());
            assert_eq!(p.score(&flow_action).unwrap(), p.score(&exact_action).unwrap());
            assert!(p.score(&flow_action).unwrap() <= p.score(&CacheAction::empty()).unwrap());
        }
    }
}
