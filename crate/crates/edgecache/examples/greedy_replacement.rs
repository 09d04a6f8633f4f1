//! Replacement-heuristic walkthrough: which swaps execute and at what cost
//! delta, on a mid-size instance no exact solver needs to handle.
//!
//! Run with: `cargo run --example greedy_replacement`

use edgecache::cache::CacheState;
use edgecache::policies::greedy_replace;
use edgecache::solvers::StageProblem;
use edgecache::topology::GridTopology;

fn main() -> edgecache::Result<()> {
    let costs = GridTopology::build_grid(2, 3, 2, 20)?.cost_matrix();

    // Sixty contents, six SCBSs with four slots each, currently caching the
    // first 24 contents round-robin.
    let n = 60;
    let mut prev = CacheState::unit(n, 6, 4);
    for c in 0..24u32 {
        prev.insert_unchecked(c, (c as usize % 6) + 1);
    }
    // Popularity now concentrates on a band of newer contents.
    let weights: Vec<i64> = (0..n).map(|c| if (30..42).contains(&c) { 25 } else { 2 }).collect();
    let gamma = 100;
    let p = StageProblem::new(&prev, &costs, weights, gamma);

    let rounds = 24; // network capacity
    let outcome = greedy_replace(&p, rounds);
    println!("{} replacements executed out of {rounds} rounds", outcome.executed_deltas.len());
    for (i, delta) in outcome.executed_deltas.iter().enumerate() {
        println!("  round {:>2}: delta {delta}", i + 1);
    }
    println!("net action: {} adds, {} evicts", outcome.action.adds().len(), outcome.action.evicts().len());
    println!(
        "stage objective: {} (keeping the cache would cost {})",
        p.score(&outcome.action)?,
        p.score(&edgecache::cache::CacheAction::empty())?
    );
    Ok(())
}
