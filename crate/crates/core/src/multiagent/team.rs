use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::poisson::{convolve, quotient_from_others};
use crate::error::{Error, Result};
use crate::expectation::EpochEvaluation;
use crate::model::{EpochPlan, Instance, PackageId, PackageSpec};

/// One tour per agent alive at the start of the epoch.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TeamEpochPlan {
    pub tours: Vec<EpochPlan>,
}

impl TeamEpochPlan {
    pub fn idle(agents: usize) -> Self {
        TeamEpochPlan { tours: vec![EpochPlan::empty(); agents] }
    }

    pub fn agents(&self) -> usize {
        self.tours.len()
    }
}

/// Reward-only expectation and survival of each tour.
pub(crate) struct TourStats {
    pub rewards: Vec<f64>,
    pub survivals: Vec<f64>,
}

pub(crate) fn tour_stats(plan: &TeamEpochPlan, instance: &Instance) -> Result<TourStats> {
    let mut seen = HashSet::new();
    let mut rewards = Vec::with_capacity(plan.agents());
    let mut survivals = Vec::with_capacity(plan.agents());
    for tour in &plan.tours {
        let specs = tour
            .ids()
            .iter()
            .map(|&id| {
                if !seen.insert(id) {
                    return Err(Error::OverlappingTours { id });
                }
                instance
                    .package(id)
                    .ok_or(Error::UnknownPackageId { id, epoch: None })
            })
            .collect::<Result<Vec<&PackageSpec>>>()?;
        let eval = EpochEvaluation::from_cycles(0.0, specs);
        rewards.push(eval.expected_reward);
        survivals.push(eval.epoch_survival);
    }
    Ok(TourStats { rewards, survivals })
}

/// `f(β′) = V(β′) − θ·(α − β′)`; an empty `continuation` means `V ≡ 0`.
pub(crate) fn outcome_values(theta: f64, agents: usize, continuation: &[f64]) -> Result<Vec<f64>> {
    if !continuation.is_empty() && continuation.len() != agents + 1 {
        return Err(Error::InvalidConfig(format!(
            "expected {} continuation values, got {}",
            agents + 1,
            continuation.len()
        )));
    }
    Ok((0..=agents)
        .map(|b| continuation.get(b).copied().unwrap_or(0.0) - theta * (agents - b) as f64)
        .collect())
}

/// `Σ_m R_m + Σ_β′ P(β′) f(β′)`.
pub(crate) fn team_value(stats: &TourStats, outcomes: &[f64]) -> f64 {
    let pmf = convolve(&stats.survivals);
    let reward: f64 = stats.rewards.iter().sum();
    reward + pmf.iter().zip(outcomes).map(|(p, f)| p * f).sum::<f64>()
}

/// Expected reward of one team epoch: delivered rewards minus `θ` per agent
/// expected to be lost.
pub fn team_epoch_expectation(plan: &TeamEpochPlan, instance: &Instance) -> Result<f64> {
    let stats = tour_stats(plan, instance)?;
    let outcomes = outcome_values(instance.theta(), plan.agents(), &[])?;
    Ok(team_value(&stats, &outcomes))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalGain {
    /// Gain per unit probability of the agent reaching the new cycle.
    pub delta: f64,
    /// Survival of the agent's current tour.
    pub survival: f64,
    /// Change in team value: `survival · delta`.
    pub gain: f64,
}

/// Effect of appending `package` as the last cycle of agent `agent`'s tour,
/// given continuation values `V(β′)` for `β′ = 0..=α` surviving agents.
pub fn marginal_gain(
    plan: &TeamEpochPlan,
    instance: &Instance,
    agent: usize,
    package: PackageId,
    continuation: &[f64],
) -> Result<MarginalGain> {
    if agent >= plan.agents() {
        return Err(Error::Domain(format!("agent {agent} out of range for {} agents", plan.agents())));
    }
    if plan.tours.iter().any(|t| t.ids().contains(&package)) {
        return Err(Error::AlreadyAssigned { id: package });
    }
    let spec = instance
        .package(package)
        .ok_or(Error::UnknownPackageId { id: package, epoch: None })?;
    let stats = tour_stats(plan, instance)?;
    let outcomes = outcome_values(instance.theta(), plan.agents(), continuation)?;
    let quotient = quotient_from_others(&stats.survivals, agent);
    let b: f64 = quotient.iter().zip(&outcomes).map(|(q, f)| q * f).sum();
    let delta = spec.reward * spec.rho - (1.0 - spec.cycle_survival()) * b;
    let survival = stats.survivals[agent];
    Ok(MarginalGain { delta, survival, gain: survival * delta })
}
