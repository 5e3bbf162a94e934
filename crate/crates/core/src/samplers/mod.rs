//! Approximate estimators: plain Monte Carlo, size-stratified (static and
//! adaptive) and relation-stratified (static and adaptive), with the stratum
//! arithmetic, allocation rules and running statistics they share.

mod alloc;
mod engine;
mod rng;
mod stats;
mod strata;

pub use alloc::{cycle_budgets, floor_weighted, neyman_allocation, proportional_allocation, Allocation};
pub use engine::{
    run_arss, run_ass, run_estimate, run_mcs, run_rss, run_ss, sample_coalition, size_card,
    EstimateReport, EstimatorConfig, Method,
};
pub use rng::unit_rng;
pub use stats::{merge_stats, StratumKey, StratumStats, Welford};
pub use strata::{
    binomial, binomial_row, enumerate_grid, enumerate_strata, grid_size, ratio_to_f64,
    reduced_bounds, stratum_card, stratum_prob, RelationVector, MAX_STRATA,
};
