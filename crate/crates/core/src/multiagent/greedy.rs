use rand::Rng;
use serde::Serialize;

use super::poisson::quotient_from_others;
use super::team::{outcome_values, team_value, TeamEpochPlan, TourStats};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::expectation::EpochEvaluation;
use crate::model::{priority_order, EpochPlan, Horizon, Instance, PackageSpec};
use crate::oracle_sim::{run_trials, summarize, SimConfig, SimResult, TrialOutcome, SEARCH_LIMIT};

pub const MAX_AGENTS: usize = 8;
pub const MAX_TEAM_PACKAGES: usize = 20;

/// Team plans and values indexed by epoch and surviving agent count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeamReport {
    pub agents: usize,
    /// `values[h][β]` for `h = 0..=K` and `β = 0..=M`; `values[K]` is zero.
    pub values: Vec<Vec<f64>>,
    /// `plans[h][β]`: the tours flown in epoch `h` when `β` agents are alive.
    pub plans: Vec<Vec<TeamEpochPlan>>,
    /// Expected mission reward starting with all agents: `values[0][M]`.
    pub total: f64,
}

impl TeamReport {
    pub fn horizon(&self) -> usize {
        self.plans.len()
    }
}

fn check_scale(instance: &Instance, agents: usize) -> Result<usize> {
    let k = match instance.horizon() {
        Horizon::Finite(k) => k,
        Horizon::Infinite => return Err(Error::InfiniteHorizon),
    };
    if agents == 0 {
        return Err(Error::InvalidConfig("a team needs at least one agent".into()));
    }
    if agents > MAX_AGENTS {
        return Err(Error::ScaleLimitExceeded(format!("{agents} agents (at most {MAX_AGENTS})")));
    }
    let n = instance.packages().len();
    if n > MAX_TEAM_PACKAGES {
        return Err(Error::ScaleLimitExceeded(format!("{n} packages (at most {MAX_TEAM_PACKAGES})")));
    }
    Ok(k)
}

/// Catalog positions available in `epoch`, by ascending package id.
fn catalog(instance: &Instance, epoch: usize) -> Vec<usize> {
    let mut positions: Vec<usize> = match instance.epoch_positions(epoch) {
        Some(p) => p.to_vec(),
        None => (0..instance.packages().len()).collect(),
    };
    positions.sort_by_key(|&p| instance.packages()[p].id);
    positions
}

fn stats_of(instance: &Instance, tours: &[Vec<usize>]) -> TourStats {
    let mut rewards = Vec::with_capacity(tours.len());
    let mut survivals = Vec::with_capacity(tours.len());
    for tour in tours {
        let eval = EpochEvaluation::from_cycles(0.0, tour.iter().map(|&p| &instance.packages()[p]));
        rewards.push(eval.expected_reward);
        survivals.push(eval.epoch_survival);
    }
    TourStats { rewards, survivals }
}

fn to_plan(instance: &Instance, tours: &[Vec<usize>]) -> TeamEpochPlan {
    TeamEpochPlan {
        tours: tours
            .iter()
            .map(|t| EpochPlan(t.iter().map(|&p| instance.packages()[p].id).collect()))
            .collect(),
    }
}

/// Backward induction over epochs and surviving counts with a solver for
/// a single `(epoch, β)` cell.
fn backward<F>(instance: &Instance, agents: usize, k: usize, exec: Execution, cell: F) -> Result<TeamReport>
where
    F: Fn(&[usize], usize, &[f64]) -> Result<(Vec<Vec<usize>>, f64)> + Sync + Send,
{
    let theta = instance.theta();
    let mut values = vec![vec![0.0; agents + 1]; k + 1];
    let mut plans = vec![Vec::new(); k];
    for h in (0..k).rev() {
        let positions = catalog(instance, h);
        let next = &values[h + 1];
        let cells = exec.map_range(agents, |i| {
            let beta = i + 1;
            let outcomes = outcome_values(theta, beta, &next[..=beta])?;
            cell(&positions, beta, &outcomes)
        });
        let mut row = vec![TeamEpochPlan::idle(0)];
        let mut vals = vec![0.0];
        for c in cells {
            let (tours, value) = c?;
            row.push(to_plan(instance, &tours));
            vals.push(value);
        }
        values[h] = vals;
        plans[h] = row;
    }
    let total = values[0][agents];
    Ok(TeamReport { agents, values, plans, total })
}

/// Greedy construction of one team epoch: repeatedly add the (agent,
/// package) pair with the largest positive gain. Tours are kept in
/// canonical delivery order, so a package is inserted at its ranked
/// position rather than appended.
fn greedy_cell(instance: &Instance, positions: &[usize], beta: usize, outcomes: &[f64]) -> (Vec<Vec<usize>>, f64) {
    let pk = |p: usize| -> &PackageSpec { &instance.packages()[p] };
    let mut tours: Vec<Vec<usize>> = vec![Vec::new(); beta];
    let mut assigned = vec![false; instance.packages().len()];
    loop {
        let stats = stats_of(instance, &tours);
        let mut best: Option<(f64, usize, usize, usize)> = None;
        for (m, tour) in tours.iter().enumerate() {
            let quotient = quotient_from_others(&stats.survivals, m);
            let b: f64 = quotient.iter().zip(outcomes).map(|(q, f)| q * f).sum();
            for &p in positions {
                if assigned[p] {
                    continue;
                }
                let spec = pk(p);
                let at = tour.partition_point(|&x| priority_order(pk(x), spec).is_lt());
                let mut prefix = 1.0;
                for &x in &tour[..at] {
                    prefix *= pk(x).cycle_survival();
                }
                let mut suffix = 0.0;
                let mut alive = prefix;
                for &x in &tour[at..] {
                    suffix += pk(x).reward * alive * pk(x).rho;
                    alive *= pk(x).cycle_survival();
                }
                let gain = prefix * spec.reward * spec.rho
                    - (1.0 - spec.cycle_survival()) * (suffix + stats.survivals[m] * b);
                if gain > best.map_or(0.0, |(g, ..)| g) {
                    best = Some((gain, m, p, at));
                }
            }
        }
        match best {
            Some((_, m, p, at)) => {
                tours[m].insert(at, p);
                assigned[p] = true;
            }
            None => break,
        }
    }
    let value = team_value(&stats_of(instance, &tours), outcomes);
    (tours, value)
}

pub fn greedy_rtpd(instance: &Instance, agents: usize) -> Result<TeamReport> {
    greedy_rtpd_with(instance, agents, Execution::default())
}

/// Greedy team plans for every epoch and surviving agent count. Values are
/// exact expectations of the greedy plans, including continuation values.
pub fn greedy_rtpd_with(instance: &Instance, agents: usize, exec: Execution) -> Result<TeamReport> {
    let k = check_scale(instance, agents)?;
    backward(instance, agents, k, exec, |positions, beta, outcomes| {
        Ok(greedy_cell(instance, positions, beta, outcomes))
    })
}

/// Exact optimum of every `(epoch, β)` cell by enumerating each assignment
/// of packages to agents and each tour order. For tiny instances only.
pub fn team_brute_force(instance: &Instance, agents: usize) -> Result<TeamReport> {
    let k = check_scale(instance, agents)?;
    for h in 0..k {
        let n = catalog(instance, h).len();
        let size = (0..n).fold(1u128, |acc, i| acc.saturating_mul((1 + agents + i) as u128));
        if size > SEARCH_LIMIT {
            return Err(Error::SearchSpaceTooLarge { size, limit: SEARCH_LIMIT });
        }
    }
    backward(instance, agents, k, Execution::Sequential, |positions, beta, outcomes| {
        fn walk(
            instance: &Instance,
            rest: &[usize],
            tours: &mut Vec<Vec<usize>>,
            outcomes: &[f64],
            best: &mut Option<(f64, Vec<Vec<usize>>)>,
        ) {
            let Some((&p, rest)) = rest.split_first() else {
                let value = team_value(&stats_of(instance, tours), outcomes);
                if best.as_ref().is_none_or(|(v, _)| value > *v) {
                    *best = Some((value, tours.clone()));
                }
                return;
            };
            walk(instance, rest, tours, outcomes, best);
            for m in 0..tours.len() {
                for at in 0..=tours[m].len() {
                    tours[m].insert(at, p);
                    walk(instance, rest, tours, outcomes, best);
                    tours[m].remove(at);
                }
            }
        }
        let mut best = None;
        walk(instance, positions, &mut vec![Vec::new(); beta], outcomes, &mut best);
        let (value, tours) = best.expect("the idle plan is always visited");
        Ok((tours, value))
    })
}

pub fn simulate_team(report: &TeamReport, instance: &Instance, config: &SimConfig) -> Result<SimResult> {
    simulate_team_with(report, instance, config, Execution::default())
}

/// Monte Carlo estimate of a team mission: in each epoch the surviving
/// agents fly the plan stored for their count.
pub fn simulate_team_with(
    report: &TeamReport,
    instance: &Instance,
    config: &SimConfig,
    exec: Execution,
) -> Result<SimResult> {
    let plans = report
        .plans
        .iter()
        .map(|row| {
            row.iter()
                .map(|plan| {
                    plan.tours
                        .iter()
                        .map(|t| {
                            t.ids()
                                .iter()
                                .map(|&id| {
                                    let s = instance
                                        .package(id)
                                        .ok_or(Error::UnknownPackageId { id, epoch: None })?;
                                    Ok((s.reward, s.rho))
                                })
                                .collect::<Result<Vec<_>>>()
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let theta = instance.theta();
    let agents = report.agents;
    let stats = run_trials(config, exec, |rng| {
        let mut alive = agents;
        let mut reward = 0.0;
        for (h, row) in plans.iter().enumerate() {
            let mut lost = 0;
            for tour in &row[alive] {
                for &(r, rho) in tour {
                    if rng.random::<f64>() >= rho {
                        lost += 1;
                        reward -= theta;
                        break;
                    }
                    reward += r;
                    if rng.random::<f64>() >= rho {
                        lost += 1;
                        reward -= theta;
                        break;
                    }
                }
            }
            alive -= lost;
            if alive == 0 {
                return TrialOutcome { reward, failed_epoch: Some(h) };
            }
        }
        TrialOutcome { reward, failed_epoch: None }
    })?;
    Ok(summarize(&stats, plans.len(), 0.0))
}
