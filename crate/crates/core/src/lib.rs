//! Optimal package-delivery planning for a single agent that may fail while
//! delivering, over a finite or infinite number of epochs.
//!
//! The crate is organised around the planning pipeline:
//!
//! * [`model`] holds the problem data (packages, instances, plans) and the
//!   reward-to-risk ratio used to rank packages.
//! * [`expectation`] evaluates any plan exactly.
//! * [`finite`] and [`infinite`] compute optimal plans.
//! * [`mdp`], [`oracle_sim`] are independent checks: an MDP formulation of
//!   the infinite-horizon problem, exhaustive search for small finite
//!   instances and a Monte Carlo mission simulator.
//! * [`multiagent`] is an experimental team extension built on Poisson
//!   binomial survival distributions.
//! * [`generate`] produces seeded random instances.
//!
//! Data-parallel loops (Monte Carlo trials, exhaustive policy search, the
//! DFT pmf) run on rayon when the `parallel` feature is enabled and fall
//! back to sequential loops otherwise; see [`Execution`].

pub mod error;
pub mod exec;
pub mod expectation;
pub mod finite;
pub mod generate;
pub mod infinite;
pub mod mdp;
pub mod model;
pub mod multiagent;
pub mod oracle_sim;

pub use error::{Error, Result};
pub use exec::Execution;
pub use expectation::{
    epoch_risk_ratio, evaluate_epoch, evaluate_mission, EpochEvaluation, MissionEvaluation,
};
pub use finite::{solve_finite, solve_finite_heterogeneous, SolveReport};
pub use infinite::{solve_infinite, InfiniteSolveReport};
pub use model::{
    distance_to_probability, probability_to_distance, reward_to_risk, validate_instance,
    EpochPlan, ExtendedValue, Horizon, Instance, MissionPlan, PackageId, PackageSpec, RatioValue,
    RawInstance, ValidationError, ValidationErrors,
};
