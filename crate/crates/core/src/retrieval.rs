//! Task-tree retrieval.
//!
//! Exhaustive retrieval builds a forest of *path trees* backwards from the
//! goal. A path-tree node is a set of units that jointly produce the
//! unresolved inputs of the units in its parent; children come from the
//! Cartesian product of per-input producer candidates. Every root-to-leaf
//! path then induces one candidate task tree (the union of its units), which
//! is ordered and checked against the kitchen.
//!
//! A greedy, kitchen-driven search is provided as a baseline.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use crate::error::{Error, ExpansionStats, Result};
use crate::model::{FunctionalUnit, ObjectKey, ObjectNode, UnitId, UniversalFoon};
use crate::parse::KitchenInventory;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExpansionLimits {
    pub max_nodes: usize,
    pub max_children: usize,
    pub max_depth: usize,
}

impl Default for ExpansionLimits {
    fn default() -> Self {
        ExpansionLimits {
            max_nodes: 100_000,
            max_children: 4096,
            max_depth: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathTreeNode {
    /// Sorted, distinct.
    pub units: Vec<UnitId>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub depth: usize,
}

/// Producer candidates for each distinct input of a path-tree node, with
/// ancestors removed. An empty candidate list marks a leaf input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateExpansion {
    pub inputs: Vec<ObjectKey>,
    pub per_input_candidates: Vec<Vec<UnitId>>,
}

impl CandidateExpansion {
    /// Size of the Cartesian product over non-empty candidate lists. `None`
    /// when every input is a leaf or the size overflows.
    pub fn product_size(&self) -> Option<usize> {
        let mut lists = self.per_input_candidates.iter().filter(|c| !c.is_empty()).peekable();
        lists.peek()?;
        lists.try_fold(1usize, |acc, c| acc.checked_mul(c.len()))
    }

    /// Distinct unit sets of the Cartesian product, in odometer order with
    /// first occurrences kept.
    pub fn combinations(&self) -> Vec<Vec<UnitId>> {
        let lists: Vec<&Vec<UnitId>> = self
            .per_input_candidates
            .iter()
            .filter(|c| !c.is_empty())
            .collect();
        if lists.is_empty() {
            return Vec::new();
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut cursor = vec![0usize; lists.len()];
        loop {
            let set: BTreeSet<UnitId> = cursor.iter().zip(&lists).map(|(&i, l)| l[i]).collect();
            let set: Vec<UnitId> = set.into_iter().collect();
            if seen.insert(set.clone()) {
                out.push(set);
            }
            // advance the odometer, last position fastest
            let mut pos = lists.len();
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                cursor[pos] += 1;
                if cursor[pos] < lists[pos].len() {
                    break;
                }
                cursor[pos] = 0;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathForest {
    pub goal: ObjectKey,
    pub nodes: Vec<PathTreeNode>,
    /// Indices into `nodes`, one per goal producer in id order.
    pub roots: Vec<usize>,
}

impl PathForest {
    /// Units on the path from `node` up to its root, including `node` itself.
    pub fn path_units(&self, node: usize) -> BTreeSet<UnitId> {
        path_units(&self.nodes, node)
    }

    pub fn root_of(&self, mut node: usize) -> usize {
        while let Some(p) = self.nodes[node].parent {
            node = p;
        }
        node
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].children.is_empty())
    }
}

fn path_units(nodes: &[PathTreeNode], node: usize) -> BTreeSet<UnitId> {
    let mut units = BTreeSet::new();
    let mut cur = Some(node);
    while let Some(idx) = cur {
        units.extend(nodes[idx].units.iter().copied());
        cur = nodes[idx].parent;
    }
    units
}

/// An ordered, executable sequence of units ending in the goal producer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskTree {
    pub goal: ObjectKey,
    pub units: Vec<FunctionalUnit>,
}

impl TaskTree {
    pub fn empty(goal: ObjectKey) -> Self {
        TaskTree {
            goal,
            units: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn unit_ids(&self) -> Vec<UnitId> {
        self.units.iter().filter_map(FunctionalUnit::id).collect()
    }

    pub fn unit_set(&self) -> BTreeSet<UnitId> {
        self.unit_ids().into_iter().collect()
    }

    /// Every input is in the kitchen or produced by an earlier unit, and the
    /// final unit outputs the goal.
    pub fn is_executable(&self, kitchen: &KitchenInventory) -> bool {
        let mut produced: HashSet<ObjectKey> = HashSet::new();
        for unit in &self.units {
            if !unit
                .inputs()
                .iter()
                .map(ObjectNode::identity)
                .all(|k| kitchen.contains(&k) || produced.contains(&k))
            {
                return false;
            }
            produced.extend(unit.outputs().iter().map(ObjectNode::identity));
        }
        match self.units.last() {
            Some(last) => last.produces(&self.goal),
            None => kitchen.contains(&self.goal),
        }
    }
}

/// One root per unit that outputs the goal.
pub fn find_roots(foon: &UniversalFoon, goal: &ObjectNode) -> Result<Vec<PathTreeNode>> {
    let key = goal.identity();
    let roots: Vec<PathTreeNode> = foon
        .producer_ids(&key)
        .map(|id| PathTreeNode {
            units: vec![id],
            parent: None,
            children: Vec::new(),
            depth: 0,
        })
        .collect();
    if roots.is_empty() {
        return Err(Error::GoalNotProducible(key.to_string()));
    }
    Ok(roots)
}

/// Producer candidates for the inputs of `units`, excluding `ancestors`.
pub fn candidate_expansion(
    foon: &UniversalFoon,
    units: &[UnitId],
    ancestors: &BTreeSet<UnitId>,
) -> CandidateExpansion {
    let mut inputs: Vec<ObjectKey> = Vec::new();
    let mut seen: HashSet<ObjectKey> = HashSet::new();
    for &id in units {
        let unit = foon.unit(id).expect("path-tree units belong to the network");
        for input in unit.inputs() {
            let key = input.identity();
            if seen.insert(key.clone()) {
                inputs.push(key);
            }
        }
    }
    let per_input_candidates = inputs
        .iter()
        .map(|key| {
            foon.producer_ids(key)
                .filter(|id| !ancestors.contains(id))
                .collect()
        })
        .collect();
    CandidateExpansion {
        inputs,
        per_input_candidates,
    }
}

pub fn build_path_forest(
    foon: &UniversalFoon,
    goal: &ObjectNode,
    limits: ExpansionLimits,
) -> Result<PathForest> {
    let mut nodes = find_roots(foon, goal)?;
    let roots: Vec<usize> = (0..nodes.len()).collect();
    let mut stats = ExpansionStats {
        nodes: nodes.len(),
        ..Default::default()
    };
    let exceeded = |limit, stats: &ExpansionStats| Error::ExpansionLimitExceeded {
        limit,
        stats: stats.clone(),
    };
    if nodes.len() > limits.max_nodes {
        return Err(exceeded("max_nodes", &stats));
    }

    let mut queue: VecDeque<usize> = roots.iter().copied().collect();

    while let Some(t) = queue.pop_front() {
        stats.expanded += 1;
        let ancestors = path_units(&nodes, t);

        let expansion = candidate_expansion(foon, &nodes[t].units, &ancestors);
        if expansion.per_input_candidates.iter().all(Vec::is_empty) {
            continue;
        }
        let size = expansion.product_size().unwrap_or(usize::MAX);
        stats.largest_product = stats.largest_product.max(size);
        if size > limits.max_children {
            return Err(exceeded("max_children", &stats));
        }
        let depth = nodes[t].depth + 1;
        if depth > limits.max_depth {
            return Err(exceeded("max_depth", &stats));
        }
        stats.max_depth_reached = stats.max_depth_reached.max(depth);

        for units in expansion.combinations() {
            if nodes.len() >= limits.max_nodes {
                return Err(exceeded("max_nodes", &stats));
            }
            let idx = nodes.len();
            nodes.push(PathTreeNode {
                units,
                parent: Some(t),
                children: Vec::new(),
                depth,
            });
            nodes[t].children.push(idx);
            queue.push_back(idx);
            stats.nodes += 1;
        }
    }

    Ok(PathForest {
        goal: goal.identity(),
        nodes,
        roots,
    })
}

/// Orders `units` dependencies-first with the root last. Among ready units
/// the lowest id goes first. Returns `None` if some unit can never run.
pub fn schedule(
    foon: &UniversalFoon,
    units: &BTreeSet<UnitId>,
    root: UnitId,
    kitchen: &KitchenInventory,
) -> Option<Vec<UnitId>> {
    let mut available: HashSet<ObjectKey> = HashSet::new();
    let ready = |id: UnitId, available: &HashSet<ObjectKey>| {
        foon.unit(id)
            .expect("scheduled units belong to the network")
            .inputs()
            .iter()
            .map(ObjectNode::identity)
            .all(|k| kitchen.contains(&k) || available.contains(&k))
    };

    let mut pending: BTreeSet<UnitId> = units.iter().copied().filter(|&id| id != root).collect();
    let mut order = Vec::with_capacity(units.len());
    while let Some(&next) = pending.iter().find(|&&id| ready(id, &available)) {
        pending.remove(&next);
        order.push(next);
        available.extend(foon.unit(next)?.outputs().iter().map(ObjectNode::identity));
    }
    if !pending.is_empty() || !ready(root, &available) {
        return None;
    }
    order.push(root);
    Some(order)
}

fn materialize(foon: &UniversalFoon, goal: &ObjectKey, ids: &[UnitId]) -> TaskTree {
    TaskTree {
        goal: goal.clone(),
        units: ids
            .iter()
            .map(|&id| foon.unit(id).expect("tree units belong to the network").clone())
            .collect(),
    }
}

/// Depth-first over each root: every root-to-leaf path yields the union of
/// its units, which is kept when it can be scheduled against `kitchen`.
/// Results are distinct by unit set, ordered by root id then DFS order.
pub fn enumerate_task_trees(
    foon: &UniversalFoon,
    forest: &PathForest,
    kitchen: &KitchenInventory,
) -> Vec<TaskTree> {
    let mut seen: HashSet<BTreeSet<UnitId>> = HashSet::new();
    let mut trees = Vec::new();
    for &root in &forest.roots {
        let root_unit = forest.nodes[root].units[0];
        let mut stack = vec![root];
        while let Some(idx) = stack.pop() {
            let node = &forest.nodes[idx];
            if node.children.is_empty() {
                let units = forest.path_units(idx);
                if seen.contains(&units) {
                    continue;
                }
                if let Some(order) = schedule(foon, &units, root_unit, kitchen) {
                    trees.push(materialize(foon, &forest.goal, &order));
                }
                seen.insert(units);
            } else {
                stack.extend(node.children.iter().rev());
            }
        }
    }
    trees
}

/// Roots, forest and enumeration in one call.
pub fn retrieve_all(
    foon: &UniversalFoon,
    goal: &ObjectNode,
    kitchen: &KitchenInventory,
    limits: ExpansionLimits,
) -> Result<Vec<TaskTree>> {
    let forest = build_path_forest(foon, goal, limits)?;
    Ok(enumerate_task_trees(foon, &forest, kitchen))
}

struct Greedy<'a> {
    foon: &'a UniversalFoon,
    kitchen: &'a KitchenInventory,
    visited: HashSet<UnitId>,
    plan: Vec<UnitId>,
    produced: HashSet<ObjectKey>,
}

impl Greedy<'_> {
    fn available(&self, key: &ObjectKey) -> bool {
        self.kitchen.contains(key) || self.produced.contains(key)
    }

    fn satisfy(&mut self, key: &ObjectKey) -> bool {
        let producers: Vec<UnitId> = self.foon.producer_ids(key).collect();
        for id in producers {
            if self.visited.contains(&id) {
                continue;
            }
            self.visited.insert(id);
            let checkpoint = self.plan.len();
            let unit = self.foon.unit(id).expect("producer ids are valid");

            // breadth: which inputs are missing right now
            let mut missing: Vec<ObjectKey> = Vec::new();
            for input in unit.inputs() {
                let k = input.identity();
                if !self.available(&k) && !missing.contains(&k) {
                    missing.push(k);
                }
            }
            // depth: chase each missing input
            let ok = missing
                .iter()
                .all(|k| self.available(k) || self.satisfy(k));
            if ok {
                self.plan.push(id);
                self.produced.extend(unit.outputs().iter().map(ObjectNode::identity));
                return true;
            }
            for undone in self.plan.drain(checkpoint..) {
                self.visited.remove(&undone);
            }
            self.produced = self
                .plan
                .iter()
                .flat_map(|&u| self.foon.unit(u).expect("valid").outputs())
                .map(ObjectNode::identity)
                .collect();
            self.visited.remove(&id);
        }
        false
    }
}

/// Kitchen-driven greedy retrieval: producers are tried in id order, missing
/// inputs are chased depth-first, and the first satisfiable tree wins.
pub fn greedy_retrieve(
    foon: &UniversalFoon,
    goal: &ObjectNode,
    kitchen: &KitchenInventory,
) -> Result<TaskTree> {
    let key = goal.identity();
    if kitchen.contains(&key) {
        return Ok(TaskTree::empty(key));
    }
    let mut search = Greedy {
        foon,
        kitchen,
        visited: HashSet::new(),
        plan: Vec::new(),
        produced: HashSet::new(),
    };
    if search.satisfy(&key) {
        Ok(materialize(foon, &key, &search.plan))
    } else {
        Err(Error::PlanningFailure(key.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeMetrics {
    pub length: usize,
    pub unit_ids: Vec<UnitId>,
    /// Longest producer-to-consumer chain, counted in units.
    pub depth: usize,
}

pub fn tree_metrics(tree: &TaskTree) -> TreeMetrics {
    let mut latest_producer: BTreeMap<ObjectKey, usize> = BTreeMap::new();
    let mut depths: Vec<usize> = Vec::with_capacity(tree.len());
    for (pos, unit) in tree.units.iter().enumerate() {
        let d = 1 + unit
            .inputs()
            .iter()
            .filter_map(|i| latest_producer.get(&i.identity()))
            .map(|&p| depths[p])
            .max()
            .unwrap_or(0);
        depths.push(d);
        for o in unit.outputs() {
            latest_producer.insert(o.identity(), pos);
        }
    }
    TreeMetrics {
        length: tree.len(),
        unit_ids: tree.unit_ids(),
        depth: depths.into_iter().max().unwrap_or(0),
    }
}
