//! Seeded random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Horizon, Instance, PackageId, PackageSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n: usize,
    pub horizon: Horizon,
    pub theta: (f64, f64),
    pub reward: (f64, f64),
    pub rho: (f64, f64),
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(n: usize, horizon: Horizon, seed: u64) -> Self {
        Self { n, horizon, theta: (0.0, 5.0), reward: (0.0, 10.0), rho: (0.0, 1.0), seed }
    }
}

fn check(name: &str, (lo, hi): (f64, f64), min: f64, max: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && min <= lo && lo <= hi && hi <= max) {
        return Err(Error::InvalidRange(format!("{name} range [{lo}, {hi}] must lie within [{min}, {max}]")));
    }
    Ok(())
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Uniform sampling within the requested ranges; package ids are `0..n`.
/// The same spec always yields the same instance.
pub fn generate_instance(spec: &GeneratorSpec) -> Result<Instance> {
    check("theta", spec.theta, 0.0, f64::MAX)?;
    check("reward", spec.reward, 0.0, f64::MAX)?;
    check("rho", spec.rho, 0.0, 1.0)?;
    if spec.horizon == Horizon::Finite(0) {
        return Err(Error::InvalidRange("finite horizon must have at least one epoch".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let theta = draw(&mut rng, spec.theta);
    let packages = (0..spec.n)
        .map(|i| {
            let reward = draw(&mut rng, spec.reward);
            let rho = draw(&mut rng, spec.rho);
            PackageSpec::new(i as PackageId, reward, rho)
        })
        .collect();
    Instance::new(theta, spec.horizon, packages)
}
