//! Optimal finite-horizon plans by backward induction on the value-to-go.
//!
//! With `V_{K+1} = 0`, epoch `h` delivers exactly the packages whose
//! reward-to-risk ratio exceeds `θ + V_{h+1}`, in non-increasing ratio
//! order. Ties at the threshold are excluded: including such a package
//! leaves `V_h` unchanged.
//!
//! For a homogeneous catalog every epoch plan is a prefix of one sorted
//! order, so the sweep only moves a cut point and the whole solve costs a
//! single sort.

use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::expectation::EpochEvaluation;
use crate::model::{
    priority_order, reward_to_risk, EpochPlan, Horizon, Instance, MissionPlan, PackageId,
    PackageSpec,
};

#[derive(Debug, Clone, PartialEq)]
enum EpochPlans {
    /// Epoch `h` delivers `order[..lengths[h]]`.
    Nested { order: Vec<PackageId>, lengths: Vec<usize> },
    Explicit(Vec<EpochPlan>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// `V_1 ..= V_{K+1}`, with `V_{K+1} = 0`.
    pub values: Vec<f64>,
    /// `θ + V_{h+1}` for each epoch.
    pub thresholds: Vec<f64>,
    /// Conditional expected reward of each chosen epoch plan.
    pub epoch_rewards: Vec<f64>,
    /// Probability of surviving each chosen epoch plan.
    pub epoch_survival: Vec<f64>,
    /// `V_1`.
    pub total: f64,
    plans: EpochPlans,
}

/// One line of the per-epoch CSV report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochRow {
    pub epoch: usize,
    #[serde(rename = "V_h")]
    pub value: f64,
    pub threshold: f64,
    pub plan_size: usize,
    pub epoch_survival: f64,
}

impl SolveReport {
    pub fn horizon(&self) -> usize {
        self.thresholds.len()
    }

    /// Ordered package ids delivered in epoch `epoch` (0-based).
    pub fn epoch_plan(&self, epoch: usize) -> &[PackageId] {
        match &self.plans {
            EpochPlans::Nested { order, lengths } => &order[..lengths[epoch]],
            EpochPlans::Explicit(plans) => plans[epoch].ids(),
        }
    }

    pub fn mission_plan(&self) -> MissionPlan {
        MissionPlan::Finite(
            (0..self.horizon()).map(|h| EpochPlan(self.epoch_plan(h).to_vec())).collect(),
        )
    }

    pub fn rows(&self) -> impl Iterator<Item = EpochRow> + '_ {
        (0..self.horizon()).map(move |h| EpochRow {
            epoch: h + 1,
            value: self.values[h],
            threshold: self.thresholds[h],
            plan_size: self.epoch_plan(h).len(),
            epoch_survival: self.epoch_survival[h],
        })
    }
}

impl Serialize for SolveReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        struct Plans<'a>(&'a SolveReport);
        impl Serialize for Plans<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let mut seq = s.serialize_seq(Some(self.0.horizon()))?;
                for h in 0..self.0.horizon() {
                    seq.serialize_element(self.0.epoch_plan(h))?;
                }
                seq.end()
            }
        }
        let mut st = s.serialize_struct("SolveReport", 5)?;
        st.serialize_field("values", &self.values)?;
        st.serialize_field("thresholds", &self.thresholds)?;
        st.serialize_field("epoch_survival", &self.epoch_survival)?;
        st.serialize_field("plans", &Plans(self))?;
        st.serialize_field("total", &self.total)?;
        st.end()
    }
}

#[derive(Clone, Copy)]
struct Ranked {
    ratio: f64,
    reward: f64,
    rho: f64,
    id: PackageId,
}

impl Ranked {
    fn spec(&self) -> PackageSpec {
        PackageSpec::new(self.id, self.reward, self.rho)
    }
}

fn rank(packages: impl Iterator<Item = PackageSpec>) -> Vec<Ranked> {
    let mut ranked: Vec<Ranked> = packages
        .map(|p| Ranked { ratio: reward_to_risk(&p).value(), reward: p.reward, rho: p.rho, id: p.id })
        .collect();
    ranked.sort_unstable_by(|a, b| priority_order(&a.spec(), &b.spec()));
    ranked
}

/// Solves a finite-horizon instance. Instances with per-epoch catalogs are
/// handed to [`solve_finite_heterogeneous`].
pub fn solve_finite(instance: &Instance) -> Result<SolveReport> {
    let k = match instance.horizon() {
        Horizon::Finite(k) => k,
        Horizon::Infinite => return Err(Error::InfiniteHorizon),
    };
    if instance.is_heterogeneous() {
        return solve_finite_heterogeneous(instance);
    }
    let theta = instance.theta();

    // Thresholds never drop below θ, so nothing at or below θ can enter.
    let candidates = rank(instance.packages().iter().copied().filter(|p| reward_to_risk(p).value() > theta));
    let m = candidates.len();
    let mut reward_prefix = Vec::with_capacity(m + 1);
    let mut survival_prefix = Vec::with_capacity(m + 1);
    let (mut reward, mut survival) = (0.0, 1.0);
    reward_prefix.push(reward);
    survival_prefix.push(survival);
    for c in &candidates {
        let delivered = survival * c.rho;
        reward += c.reward * delivered;
        survival *= c.rho * c.rho;
        reward_prefix.push(reward);
        survival_prefix.push(survival);
    }

    let mut values = vec![0.0; k + 1];
    let mut thresholds = vec![0.0; k];
    let mut epoch_rewards = vec![0.0; k];
    let mut epoch_survival = vec![0.0; k];
    let mut lengths = vec![0; k];
    let mut cut = m;
    for h in (0..k).rev() {
        let threshold = theta + values[h + 1];
        while cut > 0 && candidates[cut - 1].ratio <= threshold {
            cut -= 1;
        }
        // Rounding can make V_h a hair below V_{h+1}; let the cut recover.
        while cut < m && candidates[cut].ratio > threshold {
            cut += 1;
        }
        let e = reward_prefix[cut] - theta * (1.0 - survival_prefix[cut]);
        thresholds[h] = threshold;
        lengths[h] = cut;
        epoch_rewards[h] = e;
        epoch_survival[h] = survival_prefix[cut];
        values[h] = e + survival_prefix[cut] * values[h + 1];
    }

    let order = candidates.iter().map(|c| c.id).collect();
    Ok(SolveReport {
        total: values[0],
        values,
        thresholds,
        epoch_rewards,
        epoch_survival,
        plans: EpochPlans::Nested { order, lengths },
    })
}

/// Solves an instance whose epochs draw from their own catalogs. The subset
/// chain between epochs no longer holds, so each epoch filters the globally
/// sorted order afresh.
pub fn solve_finite_heterogeneous(instance: &Instance) -> Result<SolveReport> {
    let k = match instance.horizon() {
        Horizon::Finite(k) => k,
        Horizon::Infinite => return Err(Error::InfiniteHorizon),
    };
    if !instance.is_heterogeneous() {
        return Err(Error::MissingPerEpochCatalog);
    }
    let theta = instance.theta();
    let packages = instance.packages();
    let mut order: Vec<usize> = (0..packages.len()).collect();
    order.sort_unstable_by(|&a, &b| priority_order(&packages[a], &packages[b]));
    let ratios: Vec<f64> = packages.iter().map(|p| reward_to_risk(p).value()).collect();

    let mut allowed = vec![false; packages.len()];
    let mut values = vec![0.0; k + 1];
    let mut thresholds = vec![0.0; k];
    let mut epoch_rewards = vec![0.0; k];
    let mut epoch_survival = vec![0.0; k];
    let mut plans = vec![EpochPlan::empty(); k];
    for h in (0..k).rev() {
        let threshold = theta + values[h + 1];
        let catalog = instance.epoch_positions(h).unwrap_or(&[]);
        for &pos in catalog {
            allowed[pos] = true;
        }
        let chosen: Vec<&PackageSpec> = order
            .iter()
            .filter(|&&pos| allowed[pos] && ratios[pos] > threshold)
            .map(|&pos| &packages[pos])
            .collect();
        for &pos in catalog {
            allowed[pos] = false;
        }
        let eval = EpochEvaluation::from_cycles(theta, chosen.iter().copied());
        thresholds[h] = threshold;
        epoch_rewards[h] = eval.expected_reward;
        epoch_survival[h] = eval.epoch_survival;
        values[h] = eval.expected_reward + eval.epoch_survival * values[h + 1];
        plans[h] = EpochPlan(chosen.iter().map(|p| p.id).collect());
    }

    Ok(SolveReport {
        total: values[0],
        values,
        thresholds,
        epoch_rewards,
        epoch_survival,
        plans: EpochPlans::Explicit(plans),
    })
}
