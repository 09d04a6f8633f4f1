//! Exact finite-horizon solve of a tiny instance by backward induction,
//! compared against the myopic stage-by-stage alternative.
//!
//! Run with: `cargo run --example backward_induction`

use edgecache::cache::{serving_cost, update_penalty, CacheState};
use edgecache::solvers::{backward_induction, solve_exact_update, StageProblem};
use edgecache::topology::GridTopology;

fn main() -> edgecache::Result<()> {
    let costs = GridTopology::build_grid(1, 2, 2, 20)?.cost_matrix();
    // Four contents, two SCBSs with one slot each, three stages; demand
    // shifts from content 0 toward content 2.
    let stages: Vec<Vec<i64>> = vec![vec![5, 3, 2, 4], vec![1, 6, 2, 3], vec![4, 2, 7, 3]];
    let gamma = 100;

    let solution = backward_induction(&stages, 4, 1, &costs, gamma)?;
    println!("optimal total cost V0 = {}", solution.v0);
    for (t, &state_idx) in solution.optimal_trajectory().iter().enumerate() {
        let state = solution.state(state_idx);
        let cached: Vec<String> = (1..=2)
            .map(|m| {
                let contents: Vec<u32> = state.cached_at(m).collect();
                format!("SCBS {m}: {contents:?}")
            })
            .collect();
        println!("  stage {}: {}", t + 1, cached.join("  "));
    }

    // Myopic forward pass for comparison: optimize each stage in isolation.
    let mut cache = CacheState::unit(4, 2, 1);
    let mut total = 0;
    for (t, weights) in stages.iter().enumerate() {
        let p = StageProblem::new(&cache, &costs, weights.clone(), gamma);
        let action = solve_exact_update(&p, true)?;
        cache = cache.apply(&action)?;
        let penalty = if t == 0 { 0 } else { update_penalty(&action, gamma) };
        total += penalty + serving_cost(&cache, weights, &costs);
    }
    println!("myopic forward pass total = {total}");
    println!("lookahead advantage       = {}", total - solution.v0);
    Ok(())
}
