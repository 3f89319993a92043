//! Problem data: packages, instances, plans, and the reward-to-risk ratio.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

pub type PackageId = u64;

/// One deliverable. `rho` is the success probability of a single leg, so a
/// full depot → destination → depot cycle survives with `rho²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PackageSpec {
    pub id: PackageId,
    pub reward: f64,
    pub rho: f64,
}

impl PackageSpec {
    pub fn new(id: PackageId, reward: f64, rho: f64) -> Self {
        Self { id, reward, rho }
    }

    /// Probability of completing the round trip.
    pub fn cycle_survival(&self) -> f64 {
        self.rho * self.rho
    }

    pub fn ratio(&self) -> RatioValue {
        reward_to_risk(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Horizon {
    Finite(usize),
    Infinite,
}

impl Horizon {
    pub fn epochs(self) -> Option<usize> {
        match self {
            Horizon::Finite(k) => Some(k),
            Horizon::Infinite => None,
        }
    }
}

/// Unvalidated instance, exactly as it appears on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawInstance {
    pub theta: f64,
    pub horizon: Horizon,
    pub packages: Vec<PackageSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_epoch_packages: Option<Vec<Vec<PackageId>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationError {
    NegativeCost { theta: f64 },
    NegativeReward { id: PackageId, reward: f64 },
    ProbabilityOutOfRange { id: PackageId, rho: f64 },
    DuplicateId { id: PackageId },
    HorizonMismatch(String),
    UnknownPackageId { epoch: usize, id: PackageId },
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationError::NegativeCost { theta } => {
                write!(f, "replacement cost must be a non-negative number, got {theta}")
            }
            ValidationError::NegativeReward { id, reward } => {
                write!(f, "package {id}: reward must be a non-negative number, got {reward}")
            }
            ValidationError::ProbabilityOutOfRange { id, rho } => {
                write!(f, "package {id}: rho must lie in [0, 1], got {rho}")
            }
            ValidationError::DuplicateId { id } => write!(f, "duplicate package id {id}"),
            ValidationError::HorizonMismatch(msg) => write!(f, "horizon mismatch: {msg}"),
            ValidationError::UnknownPackageId { epoch, id } => {
                write!(f, "epoch {epoch} references unknown package {id}")
            }
        }
    }
}

/// Every violation found while validating an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationErrors(pub Vec<ValidationError>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationErrors {}

/// A validated problem instance. Construct through [`validate_instance`],
/// [`Instance::new`], [`Instance::heterogeneous`] or deserialization; every
/// constructor enforces the same invariants.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct Instance {
    theta: f64,
    horizon: Horizon,
    packages: Vec<PackageSpec>,
    per_epoch_packages: Option<Vec<Vec<PackageId>>>,
    index: HashMap<PackageId, usize>,
    // Per epoch, sorted catalog positions of the allowed packages.
    epoch_sets: Option<Vec<Vec<usize>>>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.theta == other.theta
            && self.horizon == other.horizon
            && self.packages == other.packages
            && self.per_epoch_packages == other.per_epoch_packages
    }
}

impl TryFrom<RawInstance> for Instance {
    type Error = ValidationErrors;

    fn try_from(raw: RawInstance) -> Result<Self, ValidationErrors> {
        validate_instance(raw)
    }
}

impl From<Instance> for RawInstance {
    fn from(inst: Instance) -> Self {
        RawInstance {
            theta: inst.theta,
            horizon: inst.horizon,
            packages: inst.packages,
            per_epoch_packages: inst.per_epoch_packages,
        }
    }
}

/// Checks every instance invariant and reports all violations at once.
pub fn validate_instance(raw: RawInstance) -> Result<Instance, ValidationErrors> {
    let mut errors = Vec::new();
    if !(raw.theta >= 0.0 && raw.theta.is_finite()) {
        errors.push(ValidationError::NegativeCost { theta: raw.theta });
    }
    if raw.horizon == Horizon::Finite(0) {
        errors.push(ValidationError::HorizonMismatch(
            "a finite horizon needs at least one epoch".into(),
        ));
    }

    let mut index = HashMap::with_capacity(raw.packages.len());
    for (pos, p) in raw.packages.iter().enumerate() {
        if !(p.reward >= 0.0 && p.reward.is_finite()) {
            errors.push(ValidationError::NegativeReward { id: p.id, reward: p.reward });
        }
        if !(0.0..=1.0).contains(&p.rho) {
            errors.push(ValidationError::ProbabilityOutOfRange { id: p.id, rho: p.rho });
        }
        if index.insert(p.id, pos).is_some() {
            errors.push(ValidationError::DuplicateId { id: p.id });
        }
    }

    let mut epoch_sets = None;
    if let Some(lists) = &raw.per_epoch_packages {
        match raw.horizon {
            Horizon::Infinite => errors.push(ValidationError::HorizonMismatch(
                "per-epoch catalogs require a finite horizon".into(),
            )),
            Horizon::Finite(k) if k != lists.len() => {
                errors.push(ValidationError::HorizonMismatch(format!(
                    "{} per-epoch catalogs for a horizon of {k} epochs",
                    lists.len()
                )))
            }
            Horizon::Finite(_) => {}
        }
        let mut sets = Vec::with_capacity(lists.len());
        for (h, ids) in lists.iter().enumerate() {
            let mut seen = HashSet::with_capacity(ids.len());
            let mut positions = Vec::with_capacity(ids.len());
            for &id in ids {
                if !seen.insert(id) {
                    errors.push(ValidationError::DuplicateId { id });
                }
                match index.get(&id) {
                    Some(&pos) => positions.push(pos),
                    None => errors.push(ValidationError::UnknownPackageId { epoch: h + 1, id }),
                }
            }
            positions.sort_unstable();
            positions.dedup();
            sets.push(positions);
        }
        epoch_sets = Some(sets);
    }

    if !errors.is_empty() {
        return Err(ValidationErrors(errors));
    }
    Ok(Instance {
        theta: raw.theta,
        horizon: raw.horizon,
        packages: raw.packages,
        per_epoch_packages: raw.per_epoch_packages,
        index,
        epoch_sets,
    })
}

impl Instance {
    pub fn new(theta: f64, horizon: Horizon, packages: Vec<PackageSpec>) -> Result<Self> {
        Ok(validate_instance(RawInstance { theta, horizon, packages, per_epoch_packages: None })?)
    }

    /// Finite-horizon instance where epoch `h` may only use `per_epoch[h]`.
    pub fn heterogeneous(
        theta: f64,
        packages: Vec<PackageSpec>,
        per_epoch: Vec<Vec<PackageId>>,
    ) -> Result<Self> {
        Ok(validate_instance(RawInstance {
            theta,
            horizon: Horizon::Finite(per_epoch.len()),
            packages,
            per_epoch_packages: Some(per_epoch),
        })?)
    }

    /// Same catalog and cost under a different horizon. Per-epoch catalogs
    /// are kept only when the new horizon still matches them.
    pub fn with_horizon(&self, horizon: Horizon) -> Result<Self> {
        let mut raw = RawInstance::from(self.clone());
        raw.horizon = horizon;
        Ok(validate_instance(raw)?)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn packages(&self) -> &[PackageSpec] {
        &self.packages
    }

    pub fn per_epoch_packages(&self) -> Option<&[Vec<PackageId>]> {
        self.per_epoch_packages.as_deref()
    }

    pub fn is_heterogeneous(&self) -> bool {
        self.per_epoch_packages.is_some()
    }

    pub fn package(&self, id: PackageId) -> Option<&PackageSpec> {
        self.index.get(&id).map(|&pos| &self.packages[pos])
    }

    pub(crate) fn position(&self, id: PackageId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// Catalog positions usable in epoch `epoch` (0-based), or `None` when
    /// every package is allowed.
    pub(crate) fn epoch_positions(&self, epoch: usize) -> Option<&[usize]> {
        self.epoch_sets.as_ref().map(|sets| sets[epoch].as_slice())
    }

    /// Looks up `id` for use in epoch `epoch` (0-based). Homogeneous
    /// instances allow every package in every epoch.
    pub(crate) fn package_in_epoch(&self, epoch: usize, id: PackageId) -> Result<&PackageSpec> {
        let unknown = Error::UnknownPackageId { id, epoch: Some(epoch + 1) };
        let pos = self.position(id).ok_or_else(|| unknown.clone())?;
        if let Some(sets) = &self.epoch_sets {
            let allowed = sets.get(epoch).is_some_and(|s| s.binary_search(&pos).is_ok());
            if !allowed {
                return Err(unknown);
            }
        }
        Ok(&self.packages[pos])
    }
}

/// Ordered package ids for one epoch, delivered front to back.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EpochPlan(pub Vec<PackageId>);

impl EpochPlan {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn ids(&self) -> &[PackageId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<PackageId>> for EpochPlan {
    fn from(ids: Vec<PackageId>) -> Self {
        Self(ids)
    }
}

/// A plan for the whole mission: one epoch plan per epoch, or a single plan
/// repeated every epoch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum MissionPlan {
    #[serde(rename = "plans")]
    Finite(Vec<EpochPlan>),
    #[serde(rename = "stationary")]
    Stationary(EpochPlan),
}

/// Reward-to-risk ratio `r·ρ / (1 − ρ²)`; `+∞` for riskless packages with
/// positive reward.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RatioValue(f64);

impl RatioValue {
    pub const ZERO: RatioValue = RatioValue(0.0);
    pub const INFINITE: RatioValue = RatioValue(f64::INFINITY);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Serialize for RatioValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

/// A real value or an explicit marker for unbounded expected reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedValue {
    Finite(f64),
    Unbounded,
}

impl ExtendedValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedValue::Finite(v) => Some(v),
            ExtendedValue::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, ExtendedValue::Unbounded)
    }

    /// `+∞` for the unbounded marker.
    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl Serialize for ExtendedValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtendedValue::Finite(v) => s.serialize_f64(*v),
            ExtendedValue::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

pub fn reward_to_risk(package: &PackageSpec) -> RatioValue {
    let PackageSpec { reward, rho, .. } = *package;
    if reward == 0.0 || rho == 0.0 {
        return RatioValue::ZERO;
    }
    if rho == 1.0 {
        return RatioValue::INFINITE;
    }
    // (1 - ρ)(1 + ρ) keeps precision when ρ is close to 1.
    RatioValue(reward * rho / ((1.0 - rho) * (1.0 + rho)))
}

/// Canonical delivery order: non-increasing ratio, riskless packages first
/// (larger reward first), remaining ties by ascending id.
pub fn priority_order(a: &PackageSpec, b: &PackageSpec) -> Ordering {
    let (ga, gb) = (reward_to_risk(a), reward_to_risk(b));
    gb.total_cmp(&ga)
        .then_with(|| {
            if ga.is_infinite() && gb.is_infinite() {
                b.reward.total_cmp(&a.reward)
            } else {
                Ordering::Equal
            }
        })
        .then_with(|| a.id.cmp(&b.id))
}

/// Distance equivalent of a traversal success probability when `phi` is the
/// survival probability per unit distance: `d = log_phi(rho)`.
pub fn probability_to_distance(rho: f64, phi: f64) -> Result<f64> {
    if !(phi > 0.0 && phi < 1.0) {
        return Err(Error::Domain(format!("phi must lie in (0, 1), got {phi}")));
    }
    if rho == 0.0 {
        return Err(Error::Domain("rho = 0 corresponds to an infinite distance".into()));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Domain(format!("rho must lie in (0, 1], got {rho}")));
    }
    Ok(rho.ln() / phi.ln())
}

pub fn distance_to_probability(distance: f64, phi: f64) -> Result<f64> {
    if !(phi > 0.0 && phi < 1.0) {
        return Err(Error::Domain(format!("phi must lie in (0, 1), got {phi}")));
    }
    if distance.is_nan() || distance < 0.0 {
        return Err(Error::Domain(format!("distance must be non-negative, got {distance}")));
    }
    Ok(phi.powf(distance))
}
