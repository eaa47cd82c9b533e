//! Scoring task trees by joint success probability and delegating steps to
//! a human assistant.

use std::cmp::Ordering;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FunctionalUnit, UnitId};
use crate::profile::{Rate, RobotProfile};
use crate::retrieval::TaskTree;

/// Plans whose totals differ by no more than this are co-optimal.
pub const CO_OPTIMAL_TOLERANCE: f64 = 1e-12;

/// Default improvement threshold for [`optimal_m`].
pub const DEFAULT_EPSILON: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Executor {
    Robot,
    Human,
}

impl fmt::Display for Executor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Executor::Robot => "ROBOT",
            Executor::Human => "HUMAN",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DelegationPlan {
    pub tree: TaskTree,
    pub m: usize,
    /// Parallel to `tree.units`.
    pub assignment: Vec<Executor>,
    /// Effective rate per unit: the assistant's rate for human steps.
    pub rates: Vec<Rate>,
    pub total_success: f64,
}

impl DelegationPlan {
    pub fn human_steps(&self) -> impl Iterator<Item = &FunctionalUnit> {
        self.tree
            .units
            .iter()
            .zip(&self.assignment)
            .filter(|(_, e)| **e == Executor::Human)
            .map(|(u, _)| u)
    }

    pub fn sorted_ids(&self) -> Vec<UnitId> {
        let mut ids = self.tree.unit_ids();
        ids.sort();
        ids
    }
}

pub fn unit_rate(profile: &RobotProfile, unit: &FunctionalUnit) -> Rate {
    profile.unit_rate(unit)
}

/// Product of probabilities, accumulated as a sum of logarithms.
pub fn product_of(rates: impl IntoIterator<Item = f64>) -> f64 {
    rates.into_iter().map(f64::ln).sum::<f64>().exp()
}

/// Product of robot rates over the tree; 1.0 for an empty tree.
pub fn joint_success(tree: &TaskTree, profile: &RobotProfile) -> f64 {
    product_of(tree.units.iter().map(|u| unit_rate(profile, u).get()))
}

/// Hands exactly `m` steps to the assistant, choosing the units whose
/// replacement maximizes the joint success: the `m` lowest robot rates,
/// ties broken by lower unit id.
pub fn assign_human_steps(tree: &TaskTree, profile: &RobotProfile, m: usize) -> Result<DelegationPlan> {
    let n = tree.len();
    if m >= n {
        return Err(Error::AssistantWouldPerformEntireTask { m, len: n });
    }
    let robot: Vec<Rate> = tree.units.iter().map(|u| unit_rate(profile, u)).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        robot[a]
            .get()
            .total_cmp(&robot[b].get())
            .then_with(|| tree.units[a].id().cmp(&tree.units[b].id()))
    });

    let mut assignment = vec![Executor::Robot; n];
    for &idx in order.iter().take(m) {
        assignment[idx] = Executor::Human;
    }
    let rates: Vec<Rate> = assignment
        .iter()
        .zip(&robot)
        .map(|(e, &r)| match e {
            Executor::Robot => r,
            Executor::Human => profile.assistant_rate,
        })
        .collect();
    let total_success = product_of(rates.iter().map(|r| r.get()));
    Ok(DelegationPlan {
        tree: tree.clone(),
        m,
        assignment,
        rates,
        total_success,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BestPlan {
    /// Every eligible plan, best first. The first `co_optimal` entries tie
    /// within [`CO_OPTIMAL_TOLERANCE`] and are ordered by length then ids.
    pub ranked: Vec<DelegationPlan>,
    pub co_optimal: usize,
}

impl BestPlan {
    pub fn primary(&self) -> &DelegationPlan {
        &self.ranked[0]
    }

    pub fn co_optimal_plans(&self) -> &[DelegationPlan] {
        &self.ranked[..self.co_optimal]
    }

    pub fn runner_up(&self) -> Option<&DelegationPlan> {
        self.ranked.get(1)
    }
}

fn tie_order(a: &DelegationPlan, b: &DelegationPlan) -> Ordering {
    a.tree
        .len()
        .cmp(&b.tree.len())
        .then_with(|| a.sorted_ids().cmp(&b.sorted_ids()))
}

/// Best plan at `m` among trees long enough to leave the robot at least one
/// step.
pub fn best_plan(trees: &[TaskTree], profile: &RobotProfile, m: usize) -> Result<BestPlan> {
    if trees.is_empty() {
        return Err(Error::NoTrees);
    }
    let mut plans: Vec<DelegationPlan> = trees
        .iter()
        .filter(|t| t.len() > m)
        .map(|t| assign_human_steps(t, profile, m))
        .collect::<Result<_>>()?;
    if plans.is_empty() {
        return Err(Error::MExceedsAllTrees(m));
    }

    let best = plans
        .iter()
        .map(|p| p.total_success)
        .fold(f64::NEG_INFINITY, f64::max);
    let is_top = |p: &DelegationPlan| best - p.total_success <= CO_OPTIMAL_TOLERANCE;
    plans.sort_by(|a, b| match (is_top(a), is_top(b)) {
        (true, true) => tie_order(a, b),
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        (false, false) => b
            .total_success
            .total_cmp(&a.total_success)
            .then_with(|| tie_order(a, b)),
    });
    let co_optimal = plans.iter().take_while(|p| is_top(p)).count();
    Ok(BestPlan {
        ranked: plans,
        co_optimal,
    })
}

fn longest(trees: &[TaskTree]) -> usize {
    trees.iter().map(TaskTree::len).max().unwrap_or(0)
}

/// Largest `m` whose best total improves on `m - 1` by at least `epsilon`;
/// 0 when no step clears the threshold.
pub fn optimal_m(trees: &[TaskTree], profile: &RobotProfile, epsilon: f64) -> Result<usize> {
    if trees.is_empty() {
        return Err(Error::NoTrees);
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let max_m = longest(trees).saturating_sub(1);
    let mut previous: Option<f64> = None;
    let mut chosen = 0;
    for m in 0..=max_m {
        let current = match best_plan(trees, profile, m) {
            Ok(best) => best.primary().total_success,
            Err(Error::MExceedsAllTrees(_)) => break,
            Err(e) => return Err(e),
        };
        if let Some(prev) = previous {
            if current - prev >= epsilon {
                chosen = m;
            }
        }
        previous = Some(current);
    }
    Ok(chosen)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepEntry {
    pub best_success: f64,
    /// Sorted ids of the primary best tree.
    pub best_tree: Vec<UnitId>,
    pub co_optimal: usize,
    /// The primary best tree differs from the one at `m - 1`.
    pub tree_changed: bool,
    /// The best total fell below the one at `m - 1`.
    pub drop: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub m: usize,
    /// `None` when `m` exceeds every tree's length minus one.
    pub entry: Option<SweepEntry>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub goal: String,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn success(&self, m: usize) -> Option<f64> {
        self.rows
            .get(m)
            .and_then(|r| r.entry.as_ref())
            .map(|e| e.best_success)
    }

    pub fn drops(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows
            .iter()
            .filter(|r| r.entry.as_ref().is_some_and(|e| e.drop))
            .map(|r| r.m)
    }

    /// Tab-separated, one header row, one row per `m`. Absent entries print
    /// `NA` so plotters leave a gap.
    pub fn to_table(&self) -> String {
        let mut out = String::from("m\tbest_success\tbest_tree_ids\tdrop\n");
        for row in &self.rows {
            match &row.entry {
                Some(e) => {
                    let ids: Vec<String> = e.best_tree.iter().map(UnitId::to_string).collect();
                    let _ = writeln!(
                        out,
                        "{}\t{:.6e}\t{}\t{}",
                        row.m,
                        e.best_success,
                        ids.join(","),
                        u8::from(e.drop)
                    );
                }
                None => {
                    let _ = writeln!(out, "{}\tNA\tNA\t0", row.m);
                }
            }
        }
        out
    }
}

/// Best plan for every `m` in `0..=max_m`.
pub fn sweep(trees: &[TaskTree], profile: &RobotProfile, max_m: usize) -> Result<SweepReport> {
    if trees.is_empty() {
        return Err(Error::NoTrees);
    }
    let mut rows = Vec::with_capacity(max_m + 1);
    let mut previous: Option<SweepEntry> = None;
    for m in 0..=max_m {
        let entry = match best_plan(trees, profile, m) {
            Ok(best) => {
                let primary = best.primary();
                let best_tree = primary.sorted_ids();
                let (tree_changed, drop) = match &previous {
                    Some(prev) => (
                        prev.best_tree != best_tree,
                        primary.total_success < prev.best_success,
                    ),
                    None => (false, false),
                };
                Some(SweepEntry {
                    best_success: primary.total_success,
                    best_tree,
                    co_optimal: best.co_optimal,
                    tree_changed,
                    drop,
                })
            }
            Err(Error::MExceedsAllTrees(_)) => None,
            Err(e) => return Err(e),
        };
        if entry.is_some() {
            previous = entry.clone();
        }
        rows.push(SweepRow { m, entry });
    }
    Ok(SweepReport {
        goal: trees[0].goal.to_string(),
        rows,
    })
}
