//! The infinite-horizon problem as a Markov decision process.
//!
//! States: the agent alive at the depot (`x_s`), the agent lost (`x_d`),
//! one full-success state per action (`x_{1,a}`) and one partial-failure
//! state per delivered prefix (`x_{0,f}`). An action is a subset of the
//! catalog, executed in canonical ratio order, so every action maps to one
//! epoch plan.
//!
//! Only the transition row out of `x_s` depends on the action; it is built
//! on demand per action and never stored for the whole action space.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{
    priority_order, EpochPlan, ExtendedValue, Horizon, Instance, PackageId, PackageSpec,
};

/// Largest catalog for which the `2^n` action space is enumerated.
pub const MAX_PACKAGES: usize = 16;

/// Subset of catalog positions; bit `i` selects `instance.packages()[i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action(pub u32);

impl Action {
    pub const IDLE: Action = Action(0);

    pub fn contains(self, pos: usize) -> bool {
        self.0 >> pos & 1 == 1
    }

    /// Number of packages delivered.
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.is_idle()
    }

    pub fn is_idle(self) -> bool {
        self.0 == 0
    }

    /// Parses a bit string such as `"0101"`; character `i` refers to
    /// catalog position `i`.
    pub fn parse(bits: &str, n: usize) -> Result<Action> {
        if bits.len() != n {
            return Err(Error::InvalidAction(format!("expected {n} bits, got {:?}", bits)));
        }
        let mut mask = 0u32;
        for (i, c) in bits.chars().enumerate() {
            match c {
                '0' => {}
                '1' => mask |= 1 << i,
                _ => return Err(Error::InvalidAction(format!("invalid character {c:?} in {bits:?}"))),
            }
        }
        Ok(Action(mask))
    }

    pub fn to_bits(self, n: usize) -> String {
        (0..n).map(|i| if self.contains(i) { '1' } else { '0' }).collect()
    }
}

/// Destination of a transition out of `x_s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// Agent lost after delivering the first `delivered` packages of the
    /// action's delivery order (`x_{0,f}`).
    PartialFailure { delivered: usize },
    /// Every cycle completed (`x_{1,a}`).
    FullSuccess,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub outcome: Outcome,
    pub probability: f64,
    /// Reward collected in the destination state.
    pub reward: f64,
}

#[derive(Debug, Clone)]
pub struct MdpModel {
    theta: f64,
    packages: Vec<PackageSpec>,
    // Catalog positions in canonical delivery order.
    rank: Vec<usize>,
}

pub fn build_model(instance: &Instance) -> Result<MdpModel> {
    if instance.horizon() != Horizon::Infinite {
        return Err(Error::FiniteHorizon);
    }
    let packages = instance.packages().to_vec();
    if packages.len() > MAX_PACKAGES {
        return Err(Error::TooManyPackages { count: packages.len(), max: MAX_PACKAGES });
    }
    let mut rank: Vec<usize> = (0..packages.len()).collect();
    rank.sort_by(|&a, &b| priority_order(&packages[a], &packages[b]));
    Ok(MdpModel { theta: instance.theta(), packages, rank })
}

impl MdpModel {
    pub fn n(&self) -> usize {
        self.packages.len()
    }

    pub fn action_count(&self) -> usize {
        1 << self.n()
    }

    fn check(&self, action: Action) -> Result<()> {
        if (action.0 as u64) >> self.n() != 0 {
            return Err(Error::InvalidAction(format!(
                "action {:#b} selects packages beyond the {} in the catalog",
                action.0,
                self.n()
            )));
        }
        Ok(())
    }

    /// Packages of `action` in execution order.
    pub fn delivery_order(&self, action: Action) -> Vec<&PackageSpec> {
        self.rank.iter().filter(|&&pos| action.contains(pos)).map(|&pos| &self.packages[pos]).collect()
    }

    pub fn plan(&self, action: Action) -> EpochPlan {
        EpochPlan(self.delivery_order(action).iter().map(|p| p.id).collect())
    }

    pub fn action_for(&self, ids: &[PackageId]) -> Result<Action> {
        let mut mask = 0u32;
        for id in ids {
            let pos = self
                .packages
                .iter()
                .position(|p| p.id == *id)
                .ok_or(Error::UnknownPackageId { id: *id, epoch: None })?;
            mask |= 1 << pos;
        }
        Ok(Action(mask))
    }

    /// Transition row out of `x_s` under `action`.
    ///
    /// With `ψ_j = ρ̄_{j−1} ρ_j` the probability of delivering the `j`-th
    /// package, the agent is lost before the first delivery with probability
    /// `1 − ρ_1`, between deliveries `j` and `j+1` with `ψ_j − ψ_{j+1}`, on
    /// the final return with `ψ_q (1 − ρ_q)`, and survives with `ρ̄_q`.
    pub fn transitions(&self, action: Action) -> Result<Vec<Transition>> {
        self.check(action)?;
        let order = self.delivery_order(action);
        let mut row = Vec::with_capacity(order.len() + 2);
        let mut survival = 1.0;
        let mut collected = 0.0;
        let mut prev_psi = 1.0;
        for (j, p) in order.iter().enumerate() {
            let psi = survival * p.rho;
            // Lost after `j` deliveries: on the way out to package j+1, or on
            // the way back from package j.
            row.push(Transition {
                outcome: Outcome::PartialFailure { delivered: j },
                probability: prev_psi - psi,
                reward: collected - self.theta,
            });
            collected += p.reward;
            survival *= p.rho * p.rho;
            prev_psi = psi;
        }
        if let Some(last) = order.last() {
            row.push(Transition {
                outcome: Outcome::PartialFailure { delivered: order.len() },
                probability: prev_psi * (1.0 - last.rho),
                reward: collected - self.theta,
            });
        }
        row.push(Transition { outcome: Outcome::FullSuccess, probability: survival, reward: collected });
        Ok(row)
    }

    /// Expected one-epoch reward `E_a` and survival `ρ̄_a` of an action.
    pub fn epoch_reward(&self, action: Action) -> Result<(f64, f64)> {
        let row = self.transitions(action)?;
        let reward = row.iter().map(|t| t.probability * t.reward).sum();
        let survival = row.last().map_or(1.0, |t| t.probability);
        Ok((reward, survival))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolicyValue {
    /// `E_a / (1 − ρ̄_a)`.
    pub closed_form: f64,
    /// Fixed point of the state-value sweep.
    pub iterative: f64,
    pub sweeps: usize,
}

const SWEEP_TOLERANCE: f64 = 1e-12;
const MAX_SWEEPS: usize = 50_000_000;

/// Value of `x_s` under the stationary policy that always plays `action`,
/// computed in closed form and by iterating the state-value equations
/// `V(x) = R(x) + Σ_y P(x → y) V(y)` from zero.
///
/// Sweeping stops once successive values of `x_s` differ by less than
/// `1e-12 · (1 − ρ̄_a)`, which bounds the remaining error by `1e-12`.
pub fn evaluate_policy(model: &MdpModel, action: Action) -> Result<PolicyValue> {
    let row = model.transitions(action)?;
    let success = *row.last().expect("row always ends with the success transition");
    if success.probability >= 1.0 {
        if success.reward > 0.0 {
            return Err(Error::UnboundedValue);
        }
        return Ok(PolicyValue { closed_form: 0.0, iterative: 0.0, sweeps: 0 });
    }
    let failures = &row[..row.len() - 1];
    let expected: f64 = row.iter().map(|t| t.probability * t.reward).sum();
    let closed_form = expected / (1.0 - success.probability);

    // x_d is absorbing with zero reward; x_{0,f} collect R and move to x_d;
    // x_{1,a} collects R and returns to x_s.
    let dead = 0.0;
    let partial: Vec<f64> = failures.iter().map(|t| t.reward + dead).collect();
    let failure_part: f64 = failures.iter().zip(&partial).map(|(t, v)| t.probability * v).sum();
    let mut start = 0.0;
    let mut full;
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        full = success.reward + start;
        let next_start = failure_part + success.probability * full;
        let delta = (next_start - start).abs();
        start = next_start;
        if delta < SWEEP_TOLERANCE * (1.0 - success.probability) * start.abs().max(1.0) {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            return Err(Error::NotConverged { iterations: sweeps });
        }
    }
    Ok(PolicyValue { closed_form, iterative: start, sweeps })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionValue {
    pub action: String,
    pub plan: EpochPlan,
    pub value: ExtendedValue,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestPolicy {
    pub action: Action,
    pub value: ExtendedValue,
}

fn action_value(model: &MdpModel, action: Action) -> Result<ExtendedValue> {
    match evaluate_policy(model, action) {
        Ok(v) => Ok(ExtendedValue::Finite(v.closed_form)),
        Err(Error::UnboundedValue) => Ok(ExtendedValue::Unbounded),
        Err(e) => Err(e),
    }
}

/// Values of every action, indexed by action mask.
pub fn all_action_values(model: &MdpModel, exec: Execution) -> Result<Vec<ExtendedValue>> {
    exec.map_range(model.action_count(), |mask| action_value(model, Action(mask as u32)))
        .into_iter()
        .collect()
}

/// Exhaustive search over all `2^n` stationary actions.
///
/// Actions whose values are within `1e-12` (relative) of the maximum count
/// as tied; among those the one with the fewest packages, then the smallest
/// mask, wins. Idle is therefore preferred whenever nothing beats it.
pub fn best_stationary_policy(model: &MdpModel) -> Result<BestPolicy> {
    best_stationary_policy_with(model, Execution::default())
}

pub fn best_stationary_policy_with(model: &MdpModel, exec: Execution) -> Result<BestPolicy> {
    let values = all_action_values(model, exec)?;
    if let Some(mask) = values.iter().position(|v| v.is_unbounded()) {
        let best = (0..values.len())
            .filter(|&m| values[m].is_unbounded())
            .min_by_key(|&m| ((m as u32).count_ones(), m))
            .unwrap_or(mask);
        return Ok(BestPolicy { action: Action(best as u32), value: ExtendedValue::Unbounded });
    }
    let finite: Vec<f64> = values.iter().map(|v| v.as_f64()).collect();
    let max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * max.abs().max(1.0);
    let best = (0..finite.len())
        .filter(|&m| finite[m] >= max - tol)
        .min_by_key(|&m| ((m as u32).count_ones(), m))
        .expect("the idle action is always present");
    Ok(BestPolicy { action: Action(best as u32), value: ExtendedValue::Finite(finite[best]) })
}
