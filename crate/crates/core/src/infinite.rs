//! Infinite-horizon plans. The optimal stationary plan delivers only the
//! package with the largest reward-to-risk ratio, or nothing when that
//! ratio does not exceed the replacement cost. Its value is `γ_max − θ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    reward_to_risk, EpochPlan, ExtendedValue, Horizon, Instance, MissionPlan, PackageId,
    RatioValue,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfiniteSolveReport {
    /// Package delivered every epoch; `None` means the agent stays idle.
    pub chosen: Option<PackageId>,
    pub gamma_max: RatioValue,
    pub total: ExtendedValue,
}

impl InfiniteSolveReport {
    pub fn plan(&self) -> MissionPlan {
        MissionPlan::Stationary(EpochPlan(self.chosen.into_iter().collect()))
    }
}

/// Single pass over the catalog. Among equal maximal ratios the lowest id
/// wins.
pub fn solve_infinite(instance: &Instance) -> Result<InfiniteSolveReport> {
    if instance.horizon() != Horizon::Infinite {
        return Err(Error::FiniteHorizon);
    }
    let mut best: Option<(RatioValue, PackageId)> = None;
    for p in instance.packages() {
        let g = reward_to_risk(p);
        let better = match best {
            None => true,
            Some((bg, bid)) => g.value() > bg.value() || (g.value() == bg.value() && p.id < bid),
        };
        if better {
            best = Some((g, p.id));
        }
    }
    let theta = instance.theta();
    Ok(match best {
        Some((g, id)) if g.value() > theta => InfiniteSolveReport {
            chosen: Some(id),
            gamma_max: g,
            total: if g.is_infinite() {
                ExtendedValue::Unbounded
            } else {
                ExtendedValue::Finite(g.value() - theta)
            },
        },
        other => InfiniteSolveReport {
            chosen: None,
            gamma_max: other.map_or(RatioValue::ZERO, |(g, _)| g),
            total: ExtendedValue::Finite(0.0),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expectation::evaluate_mission;
    use crate::model::PackageSpec;
    use proptest::prelude::*;

    fn instance(theta: f64, specs: &[(f64, f64)]) -> Instance {
        let packages = specs
            .iter()
            .enumerate()
            .map(|(i, &(r, rho))| PackageSpec::new(i as PackageId, r, rho))
            .collect();
        Instance::new(theta, Horizon::Infinite, packages).unwrap()
    }

    #[test]
    fn single_valuable_package() {
        let r = solve_infinite(&instance(1.0, &[(10.0, 0.9)])).unwrap();
        assert_eq!(r.chosen, Some(0));
        // 900/19 − 1 = 881/19.
        assert!((r.total.finite().unwrap() - 881.0 / 19.0).abs() < 1e-12);
    }

    #[test]
    fn idle_when_ratio_does_not_beat_cost() {
        let r = solve_infinite(&instance(1.0, &[(1.0, 0.5)])).unwrap();
        assert_eq!(r.chosen, None);
        assert_eq!(r.total, ExtendedValue::Finite(0.0));
        assert!((r.gamma_max.value() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn high_reward_can_beat_high_survival() {
        let r = solve_infinite(&instance(0.0, &[(1.0, 0.9), (100.0, 0.1)])).unwrap();
        assert_eq!(r.chosen, Some(1));
        // 0.9/0.19 and 10/0.99 by hand.
        assert!((reward_to_risk(&PackageSpec::new(0, 1.0, 0.9)).value() - 90.0 / 19.0).abs() < 1e-12);
        assert!((r.total.finite().unwrap() - 1000.0 / 99.0).abs() < 1e-12);
    }

    #[test]
    fn ties_pick_lowest_id_and_riskless_is_unbounded() {
        let r = solve_infinite(&instance(0.0, &[(1.0, 0.5), (1.0, 0.5)])).unwrap();
        assert_eq!(r.chosen, Some(0));
        let r = solve_infinite(&instance(5.0, &[(1.0, 0.5), (2.0, 1.0)])).unwrap();
        assert_eq!(r.chosen, Some(1));
        assert!(r.total.is_unbounded());
        let r = solve_infinite(&instance(0.0, &[])).unwrap();
        assert_eq!(r.chosen, None);
    }

    #[test]
    fn finite_horizon_is_rejected() {
        let inst = Instance::new(0.0, Horizon::Finite(1), vec![]).unwrap();
        assert!(matches!(solve_infinite(&inst), Err(Error::FiniteHorizon)));
    }

    proptest! {
        #[test]
        fn report_equals_evaluated_singleton(
            sp in prop::collection::vec((0.0..10.0f64, 0.0..0.999f64), 0..10),
            theta in 0.0..5.0f64,
        ) {
            let inst = instance(theta, &sp);
            let r = solve_infinite(&inst).unwrap();
            let evaluated = evaluate_mission(&r.plan(), &inst).unwrap().total.finite().unwrap();
            let total = r.total.finite().unwrap();
            prop_assert!(total >= 0.0);
            prop_assert!((evaluated - total).abs() <= 1e-9 * total.abs().max(1.0));
            prop_assert_eq!(r.chosen.is_none(), r.gamma_max.value() <= theta);
        }
    }
}
