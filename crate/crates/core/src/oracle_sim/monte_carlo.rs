use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::expectation::{evaluate_epoch, evaluate_mission};
use crate::model::{EpochPlan, Horizon, Instance, MissionPlan};

/// Epochs simulated per trial for stationary plans on an infinite horizon.
pub const STATIONARY_EPOCH_CAP: usize = 100_000;

/// Trials per aggregation block. Statistics are accumulated per block and
/// blocks are merged in index order, so the result does not depend on how
/// blocks are distributed over shards.
const BLOCK: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    pub parallel_shards: usize,
}

impl SimConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        SimConfig { trials, seed, parallel_shards: 1 }
    }

    pub fn with_shards(mut self, shards: usize) -> Self {
        self.parallel_shards = shards;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be positive".into()));
        }
        if self.parallel_shards == 0 {
            return Err(Error::InvalidConfig("parallel_shards must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub mean: f64,
    /// Sample standard deviation over `√trials`.
    pub std_error: f64,
    pub trials: u64,
    /// Fraction of trials with the agent alive at the start of each epoch.
    pub per_epoch_survival_freq: Vec<f64>,
    /// Number of trials that lost the agent in each epoch.
    pub failure_epoch_histogram: Vec<u64>,
    /// Upper bound on the bias from cutting stationary missions short.
    pub truncation_bound: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TrialOutcome {
    pub reward: f64,
    pub failed_epoch: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct TrialStats {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
    pub histogram: Vec<u64>,
}

impl TrialStats {
    fn push(&mut self, outcome: TrialOutcome) {
        self.count += 1;
        let delta = outcome.reward - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (outcome.reward - self.mean);
        if let Some(h) = outcome.failed_epoch {
            if self.histogram.len() <= h {
                self.histogram.resize(h + 1, 0);
            }
            self.histogram[h] += 1;
        }
    }

    fn merge(&mut self, other: &TrialStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.count as f64 * other.count as f64 / n as f64);
        self.count = n;
        if self.histogram.len() < other.histogram.len() {
            self.histogram.resize(other.histogram.len(), 0);
        }
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let var = (self.m2 / (self.count - 1) as f64).max(0.0);
        (var / self.count as f64).sqrt()
    }
}

/// Runs `config.trials` independent trials. Trial `i` draws from a ChaCha8
/// stream keyed by `(seed, i)`.
pub(crate) fn run_trials<F>(config: &SimConfig, exec: Execution, trial: F) -> Result<TrialStats>
where
    F: Fn(&mut ChaCha8Rng) -> TrialOutcome + Sync + Send,
{
    config.validate()?;
    let base = ChaCha8Rng::seed_from_u64(config.seed);
    let blocks = config.trials.div_ceil(BLOCK);
    let shards = (config.parallel_shards as u64).min(blocks).max(1);
    let per_shard = blocks.div_ceil(shards);

    let run_block = |b: u64| {
        let mut stats = TrialStats::default();
        let end = ((b + 1) * BLOCK).min(config.trials);
        for i in b * BLOCK..end {
            let mut rng = base.clone();
            rng.set_stream(i);
            stats.push(trial(&mut rng));
        }
        stats
    };
    let shard_results = exec.map_range(shards as usize, |s| {
        let start = s as u64 * per_shard;
        let end = (start + per_shard).min(blocks);
        (start..end).map(run_block).collect::<Vec<_>>()
    });

    let mut total = TrialStats::default();
    for block in shard_results.iter().flatten() {
        total.merge(block);
    }
    Ok(total)
}

/// Draws one mission. Each cycle has an outbound and a return leg that
/// both succeed with probability ρ.
fn run_mission(epochs: &[Vec<(f64, f64)>], repeat: usize, theta: f64, rng: &mut ChaCha8Rng) -> TrialOutcome {
    let mut reward = 0.0;
    let count = if repeat > 0 { repeat } else { epochs.len() };
    for h in 0..count {
        let cycles = if repeat > 0 { &epochs[0] } else { &epochs[h] };
        if repeat > 0 && cycles.is_empty() {
            break;
        }
        for &(r, rho) in cycles {
            if rng.random::<f64>() >= rho {
                return TrialOutcome { reward: reward - theta, failed_epoch: Some(h) };
            }
            reward += r;
            if rng.random::<f64>() >= rho {
                return TrialOutcome { reward: reward - theta, failed_epoch: Some(h) };
            }
        }
    }
    TrialOutcome { reward, failed_epoch: None }
}

pub fn simulate_mission(plan: &MissionPlan, instance: &Instance, config: &SimConfig) -> Result<SimResult> {
    simulate_mission_with(plan, instance, config, Execution::default())
}

pub fn simulate_mission_with(
    plan: &MissionPlan,
    instance: &Instance,
    config: &SimConfig,
    exec: Execution,
) -> Result<SimResult> {
    // Validates ids, epoch catalogs and the plan/horizon shape.
    let analytic = evaluate_mission(plan, instance)?;
    let resolve = |p: &EpochPlan| -> Vec<(f64, f64)> {
        p.ids()
            .iter()
            .map(|&id| {
                let spec = instance.package(id).expect("ids validated by evaluate_mission");
                (spec.reward, spec.rho)
            })
            .collect()
    };
    let (epochs, repeat, truncation_bound) = match (plan, instance.horizon()) {
        (MissionPlan::Finite(plans), _) => (plans.iter().map(resolve).collect::<Vec<_>>(), 0, 0.0),
        (MissionPlan::Stationary(p), Horizon::Finite(k)) => (vec![resolve(p); k], 0, 0.0),
        (MissionPlan::Stationary(p), Horizon::Infinite) => {
            let eval = evaluate_epoch(p, instance)?;
            if !p.is_empty() && eval.epoch_survival >= 1.0 {
                return Err(Error::UnboundedSimulation);
            }
            let bound = match analytic.total.finite() {
                Some(total) => eval.epoch_survival.powi(STATIONARY_EPOCH_CAP as i32) * total.abs(),
                None => return Err(Error::UnboundedSimulation),
            };
            (vec![resolve(p)], STATIONARY_EPOCH_CAP, bound)
        }
    };
    let theta = instance.theta();
    let stats = run_trials(config, exec, |rng| run_mission(&epochs, repeat, theta, rng))?;

    let tracked = if repeat > 0 { stats.histogram.len() } else { epochs.len() };
    Ok(summarize(&stats, tracked, truncation_bound))
}

/// Turns merged trial statistics into a [`SimResult`] that tracks
/// `tracked` epochs.
pub(crate) fn summarize(stats: &TrialStats, tracked: usize, truncation_bound: f64) -> SimResult {
    let mut histogram = stats.histogram.clone();
    histogram.resize(tracked.max(histogram.len()), 0);
    let mut alive = stats.count;
    let per_epoch_survival_freq = histogram
        .iter()
        .map(|&failed| {
            let freq = alive as f64 / stats.count as f64;
            alive -= failed;
            freq
        })
        .collect();
    SimResult {
        mean: stats.mean,
        std_error: stats.std_error(),
        trials: stats.count,
        per_epoch_survival_freq,
        failure_epoch_histogram: histogram,
        truncation_bound,
    }
}
