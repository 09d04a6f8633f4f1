//! One charged stage update solved two ways: the exact multi-copy solver
//! and the single-copy min-cost-flow formulation.
//!
//! Run with: `cargo run --example single_copy_flow`

use edgecache::cache::CacheState;
use edgecache::solvers::{solve_exact_update, solve_single_copy_update, StageProblem};
use edgecache::topology::GridTopology;

fn main() -> edgecache::Result<()> {
    let costs = GridTopology::build_grid(1, 3, 2, 20)?.cost_matrix();

    // Six contents, three SCBSs with two slots each. The cache currently
    // holds yesterday's favourites; demand has moved on.
    let mut prev = CacheState::unit(6, 3, 2);
    prev.insert_unchecked(0, 1);
    prev.insert_unchecked(1, 2);
    prev.insert_unchecked(2, 3);
    let weights = vec![1, 2, 1, 9, 7, 4];
    let gamma = 60;
    let p = StageProblem::new(&prev, &costs, weights, gamma);

    let flow_action = solve_single_copy_update(&p)?;
    println!("single-copy flow action:");
    println!("  adds   {:?}", flow_action.adds());
    println!("  evicts {:?}", flow_action.evicts());
    println!("  objective {}", p.score(&flow_action)?);

    let exact_single = solve_exact_update(&p, false)?;
    println!("exact solver, single-copy class: objective {}", p.score(&exact_single)?);

    let exact_multi = solve_exact_update(&p, true)?;
    println!("exact solver, copies allowed:    objective {}", p.score(&exact_multi)?);

    assert_eq!(p.score(&flow_action)?, p.score(&exact_single)?);
    println!("\nflow and exact single-copy objectives agree; unrestricted copies can only help");
    Ok(())
}
