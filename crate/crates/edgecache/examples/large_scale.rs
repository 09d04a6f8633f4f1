//! Large-scale run: one replication of the 15-SCBS, 1000+-content preset
//! with the greedy replacement policy, timing every stage decision.
//!
//! Run with: `cargo run --release --example large_scale`

use std::time::Instant;

use edgecache::demand::history_window;
use edgecache::harness::{account_stage, generate_trace, ScenarioSpec};
use edgecache::policies::{PolicyEngine, PolicySpec, StageContext};

fn main() -> edgecache::Result<()> {
    let spec = ScenarioSpec::load("ins7.1")?;
    let bundle = generate_trace(&spec, spec.seed)?;
    let costs = spec.grid()?.cost_matrix();
    let model = spec.ar_model()?;
    let h = model.history_depth();

    let stage1 = bundle.catalog.alive_at(1);
    let sizes: Vec<u32> = bundle.catalog.contents()[..stage1].iter().map(|c| c.size).collect();
    let mut engine = PolicyEngine::new(
        PolicySpec::greedy_replace(1),
        spec.default_solver(),
        sizes,
        vec![spec.capacity; spec.num_scbs()],
        spec.ar.zipf_skew,
    );

    println!(
        "{}: {} SCBSs, capacity {}, catalogue {} -> {}",
        spec.name,
        spec.num_scbs(),
        spec.capacity,
        spec.n0,
        spec.final_catalog_size()
    );
    let mut total_cost = 0;
    for t in 1..=spec.horizon {
        let windows: Vec<Vec<f64>> = (0..bundle.catalog.alive_at(t) as u32)
            .map(|n| history_window(&bundle.catalog, &bundle.trace, n, t, h))
            .collect();
        let ctx = StageContext {
            t,
            horizon: spec.horizon,
            catalog: &bundle.catalog,
            demand_t: bundle.trace.stage(t),
            windows: &windows,
            model: &model,
            costs: &costs,
            gamma: spec.gamma(),
        };
        let started = Instant::now();
        let changes = if t == 1 {
            engine.place_initial(&ctx)?;
            engine.cache().total_cached()
        } else {
            engine.update(&ctx)?.size()
        };
        let decision = started.elapsed();
        let account = account_stage(engine.cache(), bundle.trace.stage(t), &costs);
        total_cost += account.serving;
        println!(
            "stage {t:>2}: {changes:>4} cache changes in {decision:>10.2?}, serving {}",
            account.serving
        );
    }
    println!("total serving cost {total_cost}");
    Ok(())
}
