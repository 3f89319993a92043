//! Experimental team extension: `M` identical agents split each epoch's
//! packages into disjoint tours, and the number of agents still alive
//! after an epoch follows a Poisson binomial distribution.
//!
//! Every agent that survives an epoch is reassigned in the next one; an
//! agent lost mid-tour leaves the rest of its tour undelivered.

mod greedy;
mod poisson;
mod team;

pub use greedy::{
    greedy_rtpd, greedy_rtpd_with, simulate_team, simulate_team_with, team_brute_force, TeamReport,
    MAX_AGENTS, MAX_TEAM_PACKAGES,
};
pub use poisson::{
    poisson_binomial_dft, poisson_binomial_dft_with, poisson_binomial_enum, poisson_quotient_difference,
    PoissonBinomial, MAX_ENUM_TRIALS,
};
pub use team::{marginal_gain, team_epoch_expectation, MarginalGain, TeamEpochPlan};
