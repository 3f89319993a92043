use crate::error::{Error, Result};
use crate::expectation::{evaluate_epoch_at, evaluate_mission};
use crate::model::{EpochPlan, Horizon, Instance, MissionPlan, PackageId};

/// Largest number of complete mission plans the exhaustive search visits.
pub const SEARCH_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    pub value: f64,
    pub plan: MissionPlan,
    /// Number of complete mission plans compared.
    pub evaluated: u128,
}

/// Number of ordered subsets of `n` items: `Σ_k n!/(n−k)!`.
pub fn arrangement_count(n: usize) -> u128 {
    let mut total = 1u128;
    let mut term = 1u128;
    for k in 0..n {
        term = term.saturating_mul((n - k) as u128);
        total = total.saturating_add(term);
    }
    total
}

/// Every ordered subset of `ids` (already sorted ascending), in
/// lexicographic order of the id sequences; the empty plan comes first.
fn arrangements(ids: &[PackageId]) -> Vec<Vec<PackageId>> {
    fn extend(ids: &[PackageId], used: &mut Vec<bool>, current: &mut Vec<PackageId>, out: &mut Vec<Vec<PackageId>>) {
        out.push(current.clone());
        for (i, &id) in ids.iter().enumerate() {
            if !used[i] {
                used[i] = true;
                current.push(id);
                extend(ids, used, current, out);
                current.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(ids, &mut vec![false; ids.len()], &mut Vec::new(), &mut out);
    out
}

struct Candidate {
    plan: EpochPlan,
    reward: f64,
    survival: f64,
}

/// Exhaustive search over every per-epoch choice of packages and every
/// delivery order; no structural property of optimal plans is assumed.
///
/// Plans are visited in lexicographic order by (epoch, position, id) and a
/// later plan replaces the incumbent only if it is better by more than
/// `1e-13` relative, so among (numerically) tied optima the
/// lexicographically smallest plan is returned.
pub fn brute_force_finite(instance: &Instance) -> Result<BruteForceResult> {
    let k = match instance.horizon() {
        Horizon::Finite(k) => k,
        Horizon::Infinite => return Err(Error::InfiniteHorizon),
    };
    let catalogs: Vec<Vec<PackageId>> = (0..k)
        .map(|h| {
            let mut ids: Vec<PackageId> = match instance.epoch_positions(h) {
                Some(positions) => positions.iter().map(|&p| instance.packages()[p].id).collect(),
                None => instance.packages().iter().map(|p| p.id).collect(),
            };
            ids.sort_unstable();
            ids
        })
        .collect();
    let size = catalogs
        .iter()
        .fold(1u128, |acc, c| acc.saturating_mul(arrangement_count(c.len())));
    if size > SEARCH_LIMIT {
        return Err(Error::SearchSpaceTooLarge { size, limit: SEARCH_LIMIT });
    }

    let candidates = catalogs
        .iter()
        .enumerate()
        .map(|(h, ids)| {
            arrangements(ids)
                .into_iter()
                .map(|ids| {
                    let plan = EpochPlan(ids);
                    let eval = evaluate_epoch_at(&plan, instance, h)?;
                    Ok(Candidate { plan, reward: eval.expected_reward, survival: eval.epoch_survival })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    struct Search<'a> {
        candidates: &'a [Vec<Candidate>],
        choice: Vec<usize>,
        best: Option<(f64, Vec<usize>)>,
        evaluated: u128,
    }
    impl Search<'_> {
        fn visit(&mut self, h: usize, alive: f64, total: f64) {
            if h == self.candidates.len() {
                self.evaluated += 1;
                let better = match &self.best {
                    None => true,
                    Some((v, _)) => total > v + 1e-13 * v.abs().max(1.0),
                };
                if better {
                    self.best = Some((total, self.choice.clone()));
                }
                return;
            }
            for (i, c) in self.candidates[h].iter().enumerate() {
                self.choice.push(i);
                self.visit(h + 1, alive * c.survival, total + c.reward * alive);
                self.choice.pop();
            }
        }
    }
    let mut search = Search { candidates: &candidates, choice: Vec::with_capacity(k), best: None, evaluated: 0 };
    search.visit(0, 1.0, 0.0);
    let (_, choice) = search.best.expect("the all-empty plan is always visited");
    let plan = MissionPlan::Finite(
        choice.iter().enumerate().map(|(h, &i)| candidates[h][i].plan.clone()).collect(),
    );
    let value = evaluate_mission(&plan, instance)?
        .total
        .finite()
        .expect("finite missions have finite value");
    Ok(BruteForceResult { value, plan, evaluated: search.evaluated })
}
