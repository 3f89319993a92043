//! Exact expected reward of epoch plans and whole missions.
//!
//! Survival products are accumulated by plain multiplication in plan order.
//! For very long risky plans they may underflow to zero, which is the
//! correct limit: nothing after that point is ever delivered.

use std::collections::HashSet;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{EpochPlan, ExtendedValue, Horizon, Instance, MissionPlan, PackageSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct EpochEvaluation {
    /// Probability that each package of the plan is delivered.
    pub delivery_probs: Vec<f64>,
    /// Probability that the agent completes every cycle of the epoch.
    pub epoch_survival: f64,
    /// Expected reward of the epoch given the agent starts it alive.
    pub expected_reward: f64,
}

impl EpochEvaluation {
    pub(crate) fn from_cycles<'a>(theta: f64, cycles: impl IntoIterator<Item = &'a PackageSpec>) -> Self {
        let mut survival = 1.0;
        let mut reward = 0.0;
        let mut delivery_probs = Vec::new();
        for p in cycles {
            let psi = survival * p.rho;
            delivery_probs.push(psi);
            reward += p.reward * psi;
            survival *= p.rho * p.rho;
        }
        Self {
            delivery_probs,
            epoch_survival: survival,
            expected_reward: reward - theta * (1.0 - survival),
        }
    }
}

/// Evaluates `plan` as one epoch. Any package of the catalog may appear; use
/// [`evaluate_epoch_at`] to also enforce a per-epoch catalog.
pub fn evaluate_epoch(plan: &EpochPlan, instance: &Instance) -> Result<EpochEvaluation> {
    let cycles = resolve(plan, |id| {
        instance.package(id).ok_or(Error::UnknownPackageId { id, epoch: None })
    })?;
    Ok(EpochEvaluation::from_cycles(instance.theta(), cycles))
}

/// Evaluates `plan` as epoch `epoch` (0-based) of `instance`.
pub fn evaluate_epoch_at(plan: &EpochPlan, instance: &Instance, epoch: usize) -> Result<EpochEvaluation> {
    let cycles = resolve(plan, |id| instance.package_in_epoch(epoch, id))?;
    Ok(EpochEvaluation::from_cycles(instance.theta(), cycles))
}

fn resolve<'a>(
    plan: &EpochPlan,
    lookup: impl Fn(u64) -> Result<&'a PackageSpec>,
) -> Result<Vec<&'a PackageSpec>> {
    let mut seen = HashSet::with_capacity(plan.len());
    plan.ids()
        .iter()
        .map(|&id| {
            if !seen.insert(id) {
                return Err(Error::RepeatedPackage { id });
            }
            lookup(id)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionEvaluation {
    pub epoch_evals: Vec<EpochEvaluation>,
    /// Probability that the agent is alive at the start of each epoch.
    pub survival_to_epoch: Vec<f64>,
    /// Expected reward over the mission, as the survival-weighted sum of
    /// epoch rewards.
    pub total: ExtendedValue,
    /// The same total computed by the backward recursion
    /// `v_h = E_h + survival_h · v_{h+1}`.
    pub recursive_total: ExtendedValue,
}

impl Serialize for MissionEvaluation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct EpochRow {
            #[serde(rename = "E")]
            expected: f64,
            survival: f64,
            cumulative_survival: f64,
        }
        let rows: Vec<EpochRow> = self
            .epoch_evals
            .iter()
            .zip(&self.survival_to_epoch)
            .map(|(e, &alive)| EpochRow {
                expected: e.expected_reward,
                survival: e.epoch_survival,
                cumulative_survival: alive * e.epoch_survival,
            })
            .collect();
        let mut st = s.serialize_struct("MissionEvaluation", 2)?;
        st.serialize_field("epochs", &rows)?;
        st.serialize_field("total", &self.total)?;
        st.end()
    }
}

/// Direct and backward-recursive totals of a sequence of
/// `(expected_reward, epoch_survival)` pairs.
pub(crate) fn combine_epochs(epochs: impl DoubleEndedIterator<Item = (f64, f64)> + Clone) -> (f64, f64) {
    let mut alive = 1.0;
    let mut direct = 0.0;
    for (e, s) in epochs.clone() {
        direct += e * alive;
        alive *= s;
    }
    let recursive = epochs.rev().fold(0.0, |v, (e, s)| e + s * v);
    (direct, recursive)
}

pub fn evaluate_mission(plan: &MissionPlan, instance: &Instance) -> Result<MissionEvaluation> {
    match (plan, instance.horizon()) {
        (MissionPlan::Finite(plans), Horizon::Finite(k)) => {
            if plans.len() != k {
                return Err(Error::HorizonMismatch(format!(
                    "plan covers {} epochs but the horizon is {k}",
                    plans.len()
                )));
            }
            let evals = plans
                .iter()
                .enumerate()
                .map(|(h, p)| evaluate_epoch_at(p, instance, h))
                .collect::<Result<Vec<_>>>()?;
            Ok(finite_mission(evals))
        }
        (MissionPlan::Finite(_), Horizon::Infinite) => Err(Error::HorizonMismatch(
            "an infinite horizon needs a stationary plan".into(),
        )),
        (MissionPlan::Stationary(p), Horizon::Finite(k)) => {
            let evals = (0..k)
                .map(|h| evaluate_epoch_at(p, instance, h))
                .collect::<Result<Vec<_>>>()?;
            Ok(finite_mission(evals))
        }
        (MissionPlan::Stationary(p), Horizon::Infinite) => {
            let eval = evaluate_epoch(p, instance)?;
            let total = stationary_value(&eval, p.is_empty());
            Ok(MissionEvaluation {
                epoch_evals: vec![eval],
                survival_to_epoch: vec![1.0],
                total,
                recursive_total: total,
            })
        }
    }
}

fn finite_mission(evals: Vec<EpochEvaluation>) -> MissionEvaluation {
    let pairs = evals.iter().map(|e| (e.expected_reward, e.epoch_survival));
    let (direct, recursive) = combine_epochs(pairs);
    let mut survival_to_epoch = Vec::with_capacity(evals.len());
    let mut alive = 1.0;
    for e in &evals {
        survival_to_epoch.push(alive);
        alive *= e.epoch_survival;
    }
    MissionEvaluation {
        epoch_evals: evals,
        survival_to_epoch,
        total: ExtendedValue::Finite(direct),
        recursive_total: ExtendedValue::Finite(recursive),
    }
}

/// Value of repeating one epoch plan forever: `E / (1 − survival)`.
fn stationary_value(eval: &EpochEvaluation, empty: bool) -> ExtendedValue {
    if empty {
        return ExtendedValue::Finite(0.0);
    }
    if eval.epoch_survival >= 1.0 {
        // Riskless plan: the θ term vanishes and E is the collected reward.
        return if eval.expected_reward > 0.0 {
            ExtendedValue::Unbounded
        } else {
            ExtendedValue::Finite(0.0)
        };
    }
    ExtendedValue::Finite(eval.expected_reward / (1.0 - eval.epoch_survival))
}

/// Expected epoch reward per unit probability of losing the agent during
/// the epoch. For a single package this equals `γ − θ`.
pub fn epoch_risk_ratio(plan: &EpochPlan, instance: &Instance) -> Result<ExtendedValue> {
    if plan.is_empty() {
        return Err(Error::EmptyPlan);
    }
    let eval = evaluate_epoch(plan, instance)?;
    Ok(stationary_value(&eval, false))
}
