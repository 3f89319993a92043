//! Ground truth for the solvers: exhaustive search over small finite
//! instances and a seeded Monte Carlo mission simulator.

mod brute_force;
mod monte_carlo;

pub use brute_force::{arrangement_count, brute_force_finite, BruteForceResult, SEARCH_LIMIT};
pub use monte_carlo::{
    simulate_mission, simulate_mission_with, SimConfig, SimResult, STATIONARY_EPOCH_CAP,
};
pub(crate) use monte_carlo::{run_trials, summarize, TrialOutcome};
