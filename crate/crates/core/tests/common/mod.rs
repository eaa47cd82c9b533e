//! Shared fixtures, random network generation and brute-force oracles.
//!
//! The oracles only use `UniversalFoon::units()` and object identities; they
//! never call into the retrieval or collaboration modules they check.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};
use std::path::PathBuf;

use foon_core::model::{FunctionalUnit, MotionNode, ObjectKey, ObjectNode, Subgraph, UnitId, UniversalFoon};
use foon_core::parse::{self, KitchenInventory};
use foon_core::profile::{self, Rate, RobotProfile};
use foon_core::retrieval::TaskTree;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

pub fn subgraph(name: &str) -> Subgraph {
    parse::read_subgraph(&fixture_path(name)).unwrap()
}

pub fn kitchen(name: &str) -> KitchenInventory {
    parse::parse_kitchen(&fixture_text(name)).unwrap()
}

pub fn robot(name: &str) -> RobotProfile {
    profile::parse_profile(&fixture_text(name)).unwrap()
}

pub fn item(text: &str) -> ObjectNode {
    parse::parse_item(text).unwrap()
}

pub struct Scenario {
    pub foon: UniversalFoon,
    pub goal: ObjectNode,
    pub kitchen: KitchenInventory,
    pub profile: RobotProfile,
}

pub fn two_route() -> Scenario {
    Scenario {
        foon: foon_core::merge(&[subgraph("two_route_a.foon"), subgraph("two_route_b.foon")]).unwrap(),
        goal: item("cup{contains}[tea,water]"),
        kitchen: kitchen("two_route_kitchen.txt"),
        profile: robot("two_route_profile.toml"),
    }
}

pub fn tea() -> Scenario {
    Scenario {
        foon: foon_core::merge(&[subgraph("tea.foon")]).unwrap(),
        goal: item("cup{contains,stirred}[sugar,tea,water]"),
        kitchen: kitchen("tea_kitchen.txt"),
        profile: robot("tea_profile.toml"),
    }
}

pub fn stir() -> Scenario {
    Scenario {
        foon: foon_core::merge(&[subgraph("stir.foon")]).unwrap(),
        goal: item("tea cup{contains}[sweet tea]"),
        kitchen: kitchen("stir_kitchen.txt"),
        profile: robot("stir_profile.toml"),
    }
}

/// Unit ids of `foon` whose motion label is one of `motions`.
pub fn ids_by_motion(foon: &UniversalFoon, motions: &[&str]) -> BTreeSet<UnitId> {
    foon.units()
        .iter()
        .filter(|u| motions.contains(&u.motion().label()))
        .map(|u| u.id().unwrap())
        .collect()
}

fn chain_units(prefix: &str, goal: &str, len: usize) -> Vec<FunctionalUnit> {
    (0..len)
        .map(|i| {
            let input = ObjectNode::new(format!("{prefix} stage {i}")).unwrap();
            let output = if i + 1 == len {
                ObjectNode::new(goal).unwrap()
            } else {
                ObjectNode::new(format!("{prefix} stage {}", i + 1)).unwrap()
            };
            FunctionalUnit::new(
                vec![input],
                MotionNode::new(format!("{prefix}{i}")).unwrap(),
                vec![output],
            )
            .unwrap()
        })
        .collect()
}

/// Two alternative chains to `dish`: three steps at 0.9 each ("short") and
/// eight steps at 0.8 each ("long"). The short chain wins for m <= 2 and is
/// ineligible at m = 3, where the long chain only reaches 0.8^5.
pub fn drop_scenario() -> Scenario {
    let mut units = chain_units("short", "dish", 3);
    units.extend(chain_units("long", "dish", 8));
    let mut profile = RobotProfile::new("drop", Rate::new(0.5).unwrap());
    for i in 0..3 {
        profile = profile.with_motion(&format!("short{i}"), Rate::new(0.9).unwrap());
    }
    for i in 0..8 {
        profile = profile.with_motion(&format!("long{i}"), Rate::new(0.8).unwrap());
    }
    let kitchen: KitchenInventory = [item("short stage 0"), item("long stage 0")].iter().collect();
    Scenario {
        foon: UniversalFoon::from_units(units),
        goal: item("dish"),
        kitchen,
        profile,
    }
}

/// A random acyclic network: every unit outputs objects with a higher index
/// than all its inputs, so producer chains cannot loop. No object gets more
/// than `max_producers` producers.
pub struct RandomFoon {
    pub foon: UniversalFoon,
    pub goal: ObjectNode,
    pub kitchen: KitchenInventory,
}

pub fn random_acyclic_foon(seed: u64, max_units: usize, max_producers: usize) -> RandomFoon {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n_objects = rng.gen_range(4..=12);
        let objects: Vec<ObjectNode> = (0..n_objects)
            .map(|i| {
                let mut o = ObjectNode::new(format!("obj{i}")).unwrap();
                if rng.gen_bool(0.3) {
                    o.add_state(["cut", "hot", "mixed"][rng.gen_range(0..3)]);
                }
                o
            })
            .collect();
        let mut producer_count = vec![0usize; n_objects];
        let n_units = rng.gen_range(1..=max_units);
        let mut units = Vec::new();
        for u in 0..n_units {
            let out_idx = rng.gen_range(1..n_objects);
            if producer_count[out_idx] >= max_producers {
                continue;
            }
            let mut outputs = vec![out_idx];
            if rng.gen_bool(0.25) && out_idx + 1 < n_objects {
                let extra = rng.gen_range(out_idx + 1..n_objects);
                if producer_count[extra] < max_producers {
                    outputs.push(extra);
                }
            }
            let mut pool: Vec<usize> = (0..out_idx).collect();
            pool.shuffle(&mut rng);
            let n_in = rng.gen_range(1..=3.min(pool.len()));
            let inputs: Vec<ObjectNode> = pool[..n_in].iter().map(|&i| objects[i].clone()).collect();
            for &o in &outputs {
                producer_count[o] += 1;
            }
            units.push(
                FunctionalUnit::new(
                    inputs,
                    MotionNode::new(format!("act{u}")).unwrap(),
                    outputs.iter().map(|&i| objects[i].clone()).collect(),
                )
                .unwrap(),
            );
        }
        if units.is_empty() {
            continue;
        }
        let foon = UniversalFoon::from_units(units);
        let produced: Vec<usize> = (0..n_objects)
            .filter(|&i| producer_count[i] > 0)
            .collect();
        // bias towards deep goals
        let goal_idx = if rng.gen_bool(0.7) {
            *produced.last().unwrap()
        } else {
            produced[rng.gen_range(0..produced.len())]
        };
        let mut kitchen = KitchenInventory::new();
        for (i, o) in objects.iter().enumerate() {
            let keep = if producer_count[i] == 0 {
                rng.gen_bool(0.9)
            } else {
                i != goal_idx && rng.gen_bool(0.1)
            };
            if keep {
                kitchen.insert(o);
            }
        }
        return RandomFoon {
            foon,
            goal: objects[goal_idx].clone(),
            kitchen,
        };
    }
}

fn scan_producers(foon: &UniversalFoon, key: &ObjectKey) -> Vec<UnitId> {
    foon.units()
        .iter()
        .filter(|u| u.outputs().iter().any(|o| &o.identity() == key))
        .map(|u| u.id().unwrap())
        .collect()
}

fn unit_of(foon: &UniversalFoon, id: UnitId) -> &FunctionalUnit {
    foon.units().iter().find(|u| u.id() == Some(id)).unwrap()
}

/// Recursive backward chaining: a level of units asks for a producer of
/// each distinct input (ancestors excluded); every combination of choices
/// recurses with the chosen units as the next level.
fn chain_back(
    foon: &UniversalFoon,
    level: &BTreeSet<UnitId>,
    ancestors: &BTreeSet<UnitId>,
) -> BTreeSet<BTreeSet<UnitId>> {
    let mut needs: BTreeSet<ObjectKey> = BTreeSet::new();
    for &id in level {
        needs.extend(unit_of(foon, id).inputs().iter().map(|o| o.identity()));
    }
    let options: Vec<Vec<UnitId>> = needs
        .iter()
        .map(|k| {
            scan_producers(foon, k)
                .into_iter()
                .filter(|p| !ancestors.contains(p))
                .collect::<Vec<_>>()
        })
        .filter(|v| !v.is_empty())
        .collect();

    let mut out = BTreeSet::new();
    if options.is_empty() {
        out.insert(level.clone());
        return out;
    }

    fn pick(options: &[Vec<UnitId>], chosen: &mut BTreeSet<UnitId>, into: &mut BTreeSet<BTreeSet<UnitId>>) {
        match options.split_first() {
            None => {
                into.insert(chosen.clone());
            }
            Some((first, rest)) => {
                for &p in first {
                    let fresh = chosen.insert(p);
                    pick(rest, chosen, into);
                    if fresh {
                        chosen.remove(&p);
                    }
                }
            }
        }
    }
    let mut children = BTreeSet::new();
    pick(&options, &mut BTreeSet::new(), &mut children);

    for child in children {
        let deeper: BTreeSet<UnitId> = ancestors.union(&child).copied().collect();
        for sub in chain_back(foon, &child, &deeper) {
            out.insert(level.union(&sub).copied().collect());
        }
    }
    out
}

/// Fire units to a fixpoint from the kitchen, holding the root back until
/// every other unit has fired.
fn closure_executable(foon: &UniversalFoon, units: &BTreeSet<UnitId>, root: UnitId, kitchen: &KitchenInventory) -> bool {
    let mut have: HashSet<ObjectKey> = kitchen.iter().cloned().collect();
    let mut waiting: Vec<UnitId> = units.iter().copied().filter(|&u| u != root).collect();
    let ready = |id: UnitId, have: &HashSet<ObjectKey>| {
        unit_of(foon, id).inputs().iter().all(|o| have.contains(&o.identity()))
    };
    loop {
        let before = waiting.len();
        let mut still = Vec::new();
        for id in waiting {
            if ready(id, &have) {
                have.extend(unit_of(foon, id).outputs().iter().map(|o| o.identity()));
            } else {
                still.push(id);
            }
        }
        waiting = still;
        if waiting.is_empty() || waiting.len() == before {
            break;
        }
    }
    waiting.is_empty() && ready(root, &have)
}

pub fn oracle_trees(foon: &UniversalFoon, goal: &ObjectNode, kitchen: &KitchenInventory) -> BTreeSet<BTreeSet<UnitId>> {
    let mut trees = BTreeSet::new();
    for root in scan_producers(foon, &goal.identity()) {
        let start: BTreeSet<UnitId> = [root].into_iter().collect();
        for set in chain_back(foon, &start, &start) {
            if closure_executable(foon, &set, root, kitchen) {
                trees.insert(set);
            }
        }
    }
    trees
}

pub fn unit_sets(trees: &[TaskTree]) -> BTreeSet<BTreeSet<UnitId>> {
    trees.iter().map(TaskTree::unit_set).collect()
}

/// Best product over every way of handing exactly `m` of `rates` to an
/// assistant with rate `assistant`.
pub fn brute_force_delegation(rates: &[f64], m: usize, assistant: f64) -> f64 {
    let n = rates.len();
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != m {
            continue;
        }
        let total: f64 = (0..n)
            .map(|i| if mask & (1 << i) != 0 { assistant } else { rates[i] })
            .product();
        best = best.max(total);
    }
    best
}

/// A chain tree of `rates.len()` units plus a profile assigning the rates.
pub fn rated_chain(rates: &[f64]) -> (TaskTree, RobotProfile) {
    let units = chain_units("step", "end", rates.len());
    let foon = UniversalFoon::from_units(units);
    let mut profile = RobotProfile::new("chain", Rate::new(0.5).unwrap());
    for (i, &r) in rates.iter().enumerate() {
        profile = profile.with_motion(&format!("step{i}"), Rate::new(r).unwrap());
    }
    let tree = TaskTree {
        goal: item("end").identity(),
        units: foon.units().to_vec(),
    };
    (tree, profile)
}
