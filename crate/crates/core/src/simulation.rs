//! Monte Carlo execution of delegation plans.
//!
//! Each trial walks the plan in order; every step succeeds independently
//! with its effective rate and the first failure aborts the trial. Trial `i`
//! draws from its own ChaCha stream keyed by `(seed, i)`, so any trial can be
//! replayed on its own and the aggregate does not depend on evaluation order.

use std::collections::BTreeMap;

use rand::distributions::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::collaboration::DelegationPlan;
use crate::model::UnitId;

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationResult {
    pub trials: u64,
    pub successes: u64,
    pub empirical_rate: f64,
    /// Every unit of the plan, including those that never failed.
    pub per_unit_failure_counts: BTreeMap<UnitId, u64>,
    pub seed: u64,
    pub analytic_rate: f64,
}

impl SimulationResult {
    /// Binomial standard error of the analytic rate at this trial count.
    pub fn standard_error(&self) -> f64 {
        let p = self.analytic_rate;
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    pub fn within_sigmas(&self, k: f64) -> bool {
        (self.empirical_rate - self.analytic_rate).abs() <= k * self.standard_error()
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Position of the first failing step in trial `trial`, or `None` when the
/// whole plan succeeds.
pub fn run_trial(plan: &DelegationPlan, seed: u64, trial: u64) -> Option<usize> {
    first_failure(&steps(plan), seed, trial)
}

fn steps(plan: &DelegationPlan) -> Vec<Bernoulli> {
    plan.rates
        .iter()
        .map(|rate| Bernoulli::new(rate.get()).expect("rates lie in (0, 1]"))
        .collect()
}

fn first_failure(steps: &[Bernoulli], seed: u64, trial: u64) -> Option<usize> {
    let mut rng = trial_rng(seed, trial);
    steps.iter().position(|step| !step.sample(&mut rng))
}

pub fn simulate(plan: &DelegationPlan, trials: u64, seed: u64) -> SimulationResult {
    assert!(trials >= 1, "at least one trial is required");
    let ids: Vec<UnitId> = plan
        .tree
        .units
        .iter()
        .map(|u| u.id().expect("plan units come from a network"))
        .collect();
    let mut failures_at = vec![0u64; ids.len()];
    let mut successes = 0u64;
    let steps = steps(plan);
    for trial in 0..trials {
        match first_failure(&steps, seed, trial) {
            Some(pos) => failures_at[pos] += 1,
            None => successes += 1,
        }
    }
    let mut per_unit_failure_counts = BTreeMap::new();
    for (id, count) in ids.into_iter().zip(failures_at) {
        *per_unit_failure_counts.entry(id).or_insert(0) += count;
    }
    SimulationResult {
        trials,
        successes,
        empirical_rate: successes as f64 / trials as f64,
        per_unit_failure_counts,
        seed,
        analytic_rate: plan.total_success,
    }
}

/// Units that failed at least once, most failures first, ties by id.
pub fn failure_report(result: &SimulationResult) -> Vec<(UnitId, u64)> {
    let mut ranked: Vec<(UnitId, u64)> = result
        .per_unit_failure_counts
        .iter()
        .filter(|(_, &c)| c > 0)
        .map(|(&id, &c)| (id, c))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collaboration::assign_human_steps;
    use crate::model::{FunctionalUnit, MotionNode, ObjectNode, UniversalFoon};
    use crate::profile::{Rate, RobotProfile};
    use crate::retrieval::TaskTree;

    fn plan(rates: &[f64]) -> DelegationPlan {
        let units: Vec<FunctionalUnit> = (0..rates.len())
            .map(|i| {
                FunctionalUnit::new(
                    vec![ObjectNode::new(format!("o{i}")).unwrap()],
                    MotionNode::new(format!("m{i}")).unwrap(),
                    vec![ObjectNode::new(format!("o{}", i + 1)).unwrap()],
                )
                .unwrap()
            })
            .collect();
        let foon = UniversalFoon::from_units(units);
        let mut profile = RobotProfile::new("t", Rate::CERTAIN);
        for (i, &r) in rates.iter().enumerate() {
            profile = profile.with_motion(&format!("m{i}"), Rate::new(r).unwrap());
        }
        let tree = TaskTree {
            goal: ObjectNode::new(format!("o{}", rates.len())).unwrap().identity(),
            units: foon.units().to_vec(),
        };
        assign_human_steps(&tree, &profile, 0).unwrap()
    }

    #[test]
    fn certain_plan_always_succeeds() {
        let r = simulate(&plan(&[1.0, 1.0, 1.0]), 500, 7);
        assert_eq!(r.empirical_rate, 1.0);
        assert!(failure_report(&r).is_empty());
    }

    #[test]
    fn failures_sum_to_failed_trials() {
        let r = simulate(&plan(&[0.9, 0.5, 0.7]), 2000, 3);
        let total: u64 = r.per_unit_failure_counts.values().sum();
        assert_eq!(total, r.trials - r.successes);
        assert_eq!(r.per_unit_failure_counts.len(), 3);
    }

    #[test]
    fn trials_replay_in_isolation() {
        let p = plan(&[0.6, 0.6, 0.6]);
        let r = simulate(&p, 300, 99);
        let replayed = (0..300).filter(|&i| run_trial(&p, 99, i).is_none()).count() as u64;
        assert_eq!(replayed, r.successes);
        assert_eq!(simulate(&p, 300, 99), r);
    }

    #[test]
    fn ranking_breaks_ties_by_id() {
        let r = SimulationResult {
            trials: 10,
            successes: 4,
            empirical_rate: 0.4,
            per_unit_failure_counts: [(UnitId(3), 2), (UnitId(1), 2), (UnitId(2), 2), (UnitId(4), 0)]
                .into_iter()
                .collect(),
            seed: 0,
            analytic_rate: 0.5,
        };
        assert_eq!(
            failure_report(&r),
            vec![(UnitId(1), 2), (UnitId(2), 2), (UnitId(3), 2)]
        );
    }
}
