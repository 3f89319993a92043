use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exec::Execution;

/// Largest number of trials accepted by subset enumeration.
pub const MAX_ENUM_TRIALS: usize = 20;

/// Distribution of the number of successes among independent trials with
/// success probabilities `probs`; `pmf[b]` is `P(b | probs.len())`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonBinomial {
    pub probs: Vec<f64>,
    pub pmf: Vec<f64>,
}

impl PoissonBinomial {
    pub fn trials(&self) -> usize {
        self.probs.len()
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(b, p)| b as f64 * p).sum()
    }

    pub fn expected_failures(&self) -> f64 {
        let n = self.trials();
        self.pmf.iter().enumerate().map(|(b, p)| (n - b) as f64 * p).sum()
    }
}

fn check_probs(probs: &[f64]) -> Result<()> {
    match probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        Some(p) => Err(Error::Domain(format!("probability {p} is outside [0, 1]"))),
        None => Ok(()),
    }
}

/// Exact pmf by summing the probability of every subset of successes.
pub fn poisson_binomial_enum(probs: &[f64]) -> Result<PoissonBinomial> {
    check_probs(probs)?;
    if probs.len() > MAX_ENUM_TRIALS {
        return Err(Error::TooManyTrials { count: probs.len(), max: MAX_ENUM_TRIALS });
    }
    fn walk(probs: &[f64], successes: usize, weight: f64, pmf: &mut [f64]) {
        match probs.split_first() {
            None => pmf[successes] += weight,
            Some((&p, rest)) => {
                walk(rest, successes + 1, weight * p, pmf);
                walk(rest, successes, weight * (1.0 - p), pmf);
            }
        }
    }
    let mut pmf = vec![0.0; probs.len() + 1];
    walk(probs, 0, 1.0, &mut pmf);
    Ok(PoissonBinomial { probs: probs.to_vec(), pmf })
}

pub fn poisson_binomial_dft(probs: &[f64]) -> Result<PoissonBinomial> {
    poisson_binomial_dft_with(probs, Execution::default())
}

/// pmf from the characteristic function evaluated at the `k+1` roots of
/// unity. Small negative values from round-off are clamped to zero and the
/// result renormalized.
pub fn poisson_binomial_dft_with(probs: &[f64], exec: Execution) -> Result<PoissonBinomial> {
    check_probs(probs)?;
    let n = probs.len() + 1;
    let roots: Vec<Complex64> = (0..n)
        .map(|l| Complex64::from_polar(1.0, 2.0 * PI * l as f64 / n as f64))
        .collect();
    let chars = exec.map_range(n, |l| {
        let w = roots[l] - 1.0;
        probs.iter().fold(Complex64::new(1.0, 0.0), |acc, &p| acc * (w * p + 1.0))
    });
    let mut pmf = exec.map_range(n, |j| {
        let sum: Complex64 = chars
            .iter()
            .enumerate()
            .map(|(l, c)| c * roots[(n - (l * j) % n) % n])
            .sum();
        (sum.re / n as f64).max(0.0)
    });
    let total: f64 = pmf.iter().sum();
    if total > 0.0 {
        pmf.iter_mut().for_each(|p| *p /= total);
    }
    Ok(PoissonBinomial { probs: probs.to_vec(), pmf })
}

/// pmf by adding one trial at a time. O(α²), exact up to round-off.
pub(crate) fn convolve(probs: &[f64]) -> Vec<f64> {
    let mut pmf = Vec::with_capacity(probs.len() + 1);
    pmf.push(1.0);
    for &p in probs {
        pmf.push(0.0);
        for b in (0..pmf.len()).rev() {
            let stay = pmf[b] * (1.0 - p);
            let up = if b > 0 { pmf[b - 1] * p } else { 0.0 };
            pmf[b] = stay + up;
        }
    }
    pmf
}

/// `P̃(b) = A(b−1) − A(b)` for `b = 0..=α`, where `A` is the pmf of the
/// trials other than `agent`. This is the derivative of the team pmf with
/// respect to `probs[agent]`.
pub(crate) fn quotient_from_others(probs: &[f64], agent: usize) -> Vec<f64> {
    let others: Vec<f64> = probs
        .iter()
        .enumerate()
        .filter(|&(m, _)| m != agent)
        .map(|(_, &p)| p)
        .collect();
    let a = convolve(&others);
    (0..=probs.len())
        .map(|b| {
            let below = if b > 0 { a[b - 1] } else { 0.0 };
            let here = a.get(b).copied().unwrap_or(0.0);
            below - here
        })
        .collect()
}

/// `(P′(β|α) − P(β|α)) / (ρ̄′ − ρ̄)` where `P′` replaces `probs[agent]`
/// with `new_prob`.
pub fn poisson_quotient_difference(probs: &[f64], agent: usize, new_prob: f64) -> Result<Vec<f64>> {
    check_probs(probs)?;
    check_probs(&[new_prob])?;
    let old = *probs
        .get(agent)
        .ok_or_else(|| Error::Domain(format!("agent {agent} out of range for {} agents", probs.len())))?;
    if new_prob == old {
        return Err(Error::DegenerateQuotient);
    }
    let before = convolve(probs);
    let mut changed = probs.to_vec();
    changed[agent] = new_prob;
    let after = convolve(&changed);
    Ok(after
        .iter()
        .zip(&before)
        .map(|(a, b)| (a - b) / (new_prob - old))
        .collect())
}
