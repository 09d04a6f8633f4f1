//! Online collaborative edge-cache simulator.
//!
//! Models a grid of small-cell base stations (SCBSs) with capacitated caches
//! backed by a macro-cell base station (MCBS) that holds the full content
//! catalogue. Per-content demand evolves by an auto-regressive process with
//! a diurnal profile and new contents appearing over the day. Cache contents
//! are placed free of charge at the first stage and updated at every later
//! stage against a per-change penalty; the goal is to minimize total network
//! usage cost (delivery plus update penalties) over the horizon.
//!
//! The crate provides:
//!
//! - [`topology`]: the SCBS grid and the delivery-cost matrix;
//! - [`demand`]: catalogue management, demand realization and AR forecasting;
//! - [`cache`]: cache states, update actions and the exact delivery cost;
//! - [`solvers`]: exact stage updates, the single-copy min-cost-flow
//!   formulation, one-shot placements and full backward induction;
//! - [`policies`]: the update-policy zoo (offline + LRU baselines, myopic,
//!   one-step, rolling horizon, greedy replacement, clairvoyant bound);
//! - [`harness`]: scenario presets, Monte-Carlo execution and reporting.
//!
//! Start with the runnable examples (`cargo run --example compare_policies`)
//! or the `edgecache` binary (`edgecache run --scenario ins1.1 ...`).

pub mod cache;
pub mod demand;
mod error;
pub mod harness;
pub mod policies;
pub mod solvers;
pub mod topology;

pub use error::{Error, Result};
