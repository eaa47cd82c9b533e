//! Object and motion nodes, functional units, subgraphs and the merged
//! universal network.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of a functional unit inside a [`UniversalFoon`].
///
/// Ids are 1-based ranks of the unit under the canonical unit order, so the
/// same set of units always receives the same ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitId(pub u32);

impl fmt::Display for UnitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn normalize(s: &str) -> String {
    s.trim().to_lowercase()
}

/// An object in some state, possibly containing other objects.
///
/// Labels keep their original spelling; comparisons go through
/// [`ObjectNode::identity`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectNode {
    label: String,
    states: BTreeSet<String>,
    ingredients: BTreeSet<String>,
}

impl ObjectNode {
    pub fn new(label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if label.trim().is_empty() {
            return Err(Error::EmptyLabel);
        }
        Ok(ObjectNode {
            label,
            states: BTreeSet::new(),
            ingredients: BTreeSet::new(),
        })
    }

    pub fn with_state(mut self, state: impl Into<String>) -> Self {
        self.add_state(state);
        self
    }

    pub fn with_ingredient(mut self, ingredient: impl Into<String>) -> Self {
        self.add_ingredient(ingredient);
        self
    }

    pub fn add_state(&mut self, state: impl Into<String>) {
        self.states.insert(state.into());
    }

    pub fn add_ingredient(&mut self, ingredient: impl Into<String>) {
        self.ingredients.insert(ingredient.into());
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn states(&self) -> &BTreeSet<String> {
        &self.states
    }

    pub fn ingredients(&self) -> &BTreeSet<String> {
        &self.ingredients
    }

    pub fn identity(&self) -> ObjectKey {
        object_identity(self)
    }
}

impl fmt::Display for ObjectNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_item(
            f,
            &self.label,
            self.states.iter().map(String::as_str),
            self.ingredients.iter().map(String::as_str),
        )
    }
}

fn write_item<'a>(
    f: &mut fmt::Formatter<'_>,
    label: &str,
    states: impl ExactSizeIterator<Item = &'a str>,
    ingredients: impl ExactSizeIterator<Item = &'a str>,
) -> fmt::Result {
    f.write_str(label)?;
    if states.len() > 0 {
        write!(f, "{{{}}}", states.collect::<Vec<_>>().join(","))?;
    }
    if ingredients.len() > 0 {
        write!(f, "[{}]", ingredients.collect::<Vec<_>>().join(","))?;
    }
    Ok(())
}

/// Canonical object identity: trimmed lowercase label plus sorted,
/// deduplicated, normalized state and ingredient sets.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectKey {
    pub label: String,
    pub states: Vec<String>,
    pub ingredients: Vec<String>,
}

impl fmt::Display for ObjectKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_item(
            f,
            &self.label,
            self.states.iter().map(String::as_str),
            self.ingredients.iter().map(String::as_str),
        )
    }
}

pub fn object_identity(node: &ObjectNode) -> ObjectKey {
    let canon = |set: &BTreeSet<String>| {
        set.iter()
            .map(|s| normalize(s))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect::<Vec<_>>()
    };
    ObjectKey {
        label: normalize(&node.label),
        states: canon(&node.states),
        ingredients: canon(&node.ingredients),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MotionNode {
    label: String,
}

impl MotionNode {
    pub fn new(label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if label.trim().is_empty() {
            return Err(Error::EmptyMotion);
        }
        Ok(MotionNode { label })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Lowercased, trimmed label used for comparisons and rate lookup.
    pub fn key(&self) -> String {
        normalize(&self.label)
    }
}

impl fmt::Display for MotionNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// One manipulation: input objects, a single motion, output objects.
///
/// Edges only run input -> motion and motion -> output, so a unit is
/// bipartite by construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionalUnit {
    id: Option<UnitId>,
    inputs: Vec<ObjectNode>,
    outputs: Vec<ObjectNode>,
    motion: MotionNode,
}

impl FunctionalUnit {
    pub fn new(inputs: Vec<ObjectNode>, motion: MotionNode, outputs: Vec<ObjectNode>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::NoInputs);
        }
        if outputs.is_empty() {
            return Err(Error::NoOutputs);
        }
        Ok(FunctionalUnit {
            id: None,
            inputs,
            outputs,
            motion,
        })
    }

    /// Assigned when the unit becomes part of a [`UniversalFoon`].
    pub fn id(&self) -> Option<UnitId> {
        self.id
    }

    pub fn inputs(&self) -> &[ObjectNode] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[ObjectNode] {
        &self.outputs
    }

    pub fn motion(&self) -> &MotionNode {
        &self.motion
    }

    pub fn key(&self) -> UnitKey {
        let keys = |nodes: &[ObjectNode]| {
            let mut v: Vec<ObjectKey> = nodes.iter().map(object_identity).collect();
            v.sort();
            v
        };
        UnitKey {
            motion: self.motion.key(),
            inputs: keys(&self.inputs),
            outputs: keys(&self.outputs),
        }
    }

    pub fn produces(&self, key: &ObjectKey) -> bool {
        self.outputs.iter().any(|o| &object_identity(o) == key)
    }

    fn raw_order(&self) -> (&MotionNode, &[ObjectNode], &[ObjectNode]) {
        (&self.motion, &self.inputs, &self.outputs)
    }
}

/// Canonical form of a unit. Two units are duplicates iff their keys are
/// equal; the derived ordering is the canonical order used for ids.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnitKey {
    pub motion: String,
    pub inputs: Vec<ObjectKey>,
    pub outputs: Vec<ObjectKey>,
}

/// Same input/output counts, same input and output identity multisets, and
/// the same motion (case-insensitive).
pub fn unit_equals(a: &FunctionalUnit, b: &FunctionalUnit) -> bool {
    a.inputs.len() == b.inputs.len() && a.outputs.len() == b.outputs.len() && a.key() == b.key()
}

/// Units of one demonstrated activity, in demonstration order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Subgraph {
    pub name: String,
    pub units: Vec<FunctionalUnit>,
}

impl Subgraph {
    pub fn new(name: impl Into<String>, units: Vec<FunctionalUnit>) -> Self {
        Subgraph {
            name: name.into(),
            units,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ObjectLinks {
    pub producers: BTreeSet<UnitId>,
    pub consumers: BTreeSet<UnitId>,
}

/// Deduplicated union of subgraphs. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniversalFoon {
    units: Vec<FunctionalUnit>,
    object_index: BTreeMap<ObjectKey, ObjectLinks>,
}

impl UniversalFoon {
    /// Builds a network from arbitrary units, dropping duplicates and
    /// assigning canonical ids. Among duplicates the representative is the
    /// smallest unit under raw (case-preserving) ordering.
    pub fn from_units(units: impl IntoIterator<Item = FunctionalUnit>) -> Self {
        let mut classes: BTreeMap<UnitKey, FunctionalUnit> = BTreeMap::new();
        for unit in units {
            let key = unit.key();
            match classes.get_mut(&key) {
                Some(existing) => {
                    if unit.raw_order() < existing.raw_order() {
                        *existing = unit;
                    }
                }
                None => {
                    classes.insert(key, unit);
                }
            }
        }
        let units: Vec<FunctionalUnit> = classes
            .into_values()
            .enumerate()
            .map(|(rank, mut unit)| {
                unit.id = Some(UnitId(rank as u32 + 1));
                unit
            })
            .collect();
        let object_index = build_index(&units);
        UniversalFoon {
            units,
            object_index,
        }
    }

    /// Units in id order.
    pub fn units(&self) -> &[FunctionalUnit] {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn unit(&self, id: UnitId) -> Option<&FunctionalUnit> {
        let idx = (id.0 as usize).checked_sub(1)?;
        self.units.get(idx)
    }

    pub fn object_index(&self) -> &BTreeMap<ObjectKey, ObjectLinks> {
        &self.object_index
    }

    /// Recomputes the object index from the unit list.
    pub fn rebuild_index(&self) -> BTreeMap<ObjectKey, ObjectLinks> {
        build_index(&self.units)
    }

    /// Ids of units whose outputs include `key`, ascending.
    pub fn producer_ids(&self, key: &ObjectKey) -> impl Iterator<Item = UnitId> + '_ {
        self.object_index
            .get(key)
            .into_iter()
            .flat_map(|links| links.producers.iter().copied())
    }

    pub fn consumer_ids(&self, key: &ObjectKey) -> impl Iterator<Item = UnitId> + '_ {
        self.object_index
            .get(key)
            .into_iter()
            .flat_map(|links| links.consumers.iter().copied())
    }

    pub fn producers_of(&self, node: &ObjectNode) -> Vec<&FunctionalUnit> {
        self.producer_ids(&node.identity())
            .filter_map(|id| self.unit(id))
            .collect()
    }

    /// The whole network as a single subgraph in id order.
    pub fn to_subgraph(&self, name: impl Into<String>) -> Subgraph {
        Subgraph::new(name, self.units.clone())
    }
}

fn build_index(units: &[FunctionalUnit]) -> BTreeMap<ObjectKey, ObjectLinks> {
    let mut index: BTreeMap<ObjectKey, ObjectLinks> = BTreeMap::new();
    for unit in units {
        let id = unit.id.expect("indexed units carry ids");
        for input in &unit.inputs {
            index.entry(input.identity()).or_default().consumers.insert(id);
        }
        for output in &unit.outputs {
            index.entry(output.identity()).or_default().producers.insert(id);
        }
    }
    index
}

/// Union of all subgraphs with duplicate units removed.
pub fn merge(subgraphs: &[Subgraph]) -> Result<UniversalFoon> {
    if subgraphs.is_empty() {
        return Err(Error::NothingToMerge);
    }
    if let Some(empty) = subgraphs.iter().find(|sg| sg.units.is_empty()) {
        return Err(Error::EmptySubgraph(empty.name.clone()));
    }
    Ok(UniversalFoon::from_units(
        subgraphs.iter().flat_map(|sg| sg.units.iter().cloned()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obj(label: &str, states: &[&str], ingredients: &[&str]) -> ObjectNode {
        let mut o = ObjectNode::new(label).unwrap();
        for s in states {
            o.add_state(*s);
        }
        for i in ingredients {
            o.add_ingredient(*i);
        }
        o
    }

    fn stir_unit(motion: &str) -> FunctionalUnit {
        FunctionalUnit::new(
            vec![obj("tea cup", &["contains"], &["sugar", "tea"]), obj("spoon", &[], &[])],
            MotionNode::new(motion).unwrap(),
            vec![
                obj("tea cup", &["contains"], &["sweet tea"]),
                obj("sweet tea", &["mixed"], &[]),
                obj("spoon", &["wet"], &[]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn identity_normalizes_case_and_whitespace() {
        let a = obj("potato", &["diced"], &[]);
        let b = obj("Potato ", &["diced"], &[]);
        assert_eq!(a.identity(), b.identity());
    }

    #[test]
    fn identity_ignores_ingredient_order() {
        let mut a = ObjectNode::new("tea cup").unwrap().with_state("contains");
        a.add_ingredient("tea");
        a.add_ingredient("sugar");
        let mut b = ObjectNode::new("tea cup").unwrap().with_state("contains");
        b.add_ingredient("sugar");
        b.add_ingredient("tea");
        assert_eq!(a.identity(), b.identity());
    }

    #[test]
    fn identity_distinguishes_states() {
        assert_ne!(
            obj("potato", &["whole"], &[]).identity(),
            obj("potato", &["diced"], &[]).identity()
        );
    }

    #[test]
    fn empty_labels_rejected() {
        assert!(matches!(ObjectNode::new("  "), Err(Error::EmptyLabel)));
        assert!(matches!(MotionNode::new(""), Err(Error::EmptyMotion)));
    }

    #[test]
    fn unit_needs_inputs_and_outputs() {
        let m = MotionNode::new("stir").unwrap();
        let o = obj("cup", &[], &[]);
        assert!(matches!(
            FunctionalUnit::new(vec![], m.clone(), vec![o.clone()]),
            Err(Error::NoInputs)
        ));
        assert!(matches!(
            FunctionalUnit::new(vec![o], m, vec![]),
            Err(Error::NoOutputs)
        ));
    }

    #[test]
    fn unit_equality() {
        let a = stir_unit("stir");
        assert!(unit_equals(&a, &a));

        let mut reversed = a.clone();
        reversed.inputs.reverse();
        assert!(unit_equals(&a, &reversed));

        assert!(!unit_equals(&a, &stir_unit("pour")));
        assert!(unit_equals(&a, &stir_unit("STIR")));
    }

    #[test]
    fn multiset_inputs_are_not_collapsed() {
        let m = MotionNode::new("mix").unwrap();
        let egg = obj("egg", &[], &[]);
        let out = vec![obj("batter", &[], &[])];
        let one = FunctionalUnit::new(vec![egg.clone()], m.clone(), out.clone()).unwrap();
        let two = FunctionalUnit::new(vec![egg.clone(), egg], m, out).unwrap();
        assert!(!unit_equals(&one, &two));
    }

    #[test]
    fn merge_rejects_empty_input() {
        assert!(matches!(merge(&[]), Err(Error::NothingToMerge)));
        assert!(matches!(
            merge(&[Subgraph::new("x", vec![])]),
            Err(Error::EmptySubgraph(_))
        ));
    }

    #[test]
    fn merge_deduplicates_and_indexes() {
        let sg = Subgraph::new("tea", vec![stir_unit("stir"), stir_unit("Stir")]);
        let foon = merge(&[sg.clone(), sg]).unwrap();
        assert_eq!(foon.len(), 1);
        assert_eq!(foon.units()[0].id(), Some(UnitId(1)));
        assert_eq!(foon.units()[0].motion().label(), "Stir");
        assert_eq!(foon.object_index(), &foon.rebuild_index());

        let goal = obj("tea cup", &["contains"], &["sweet tea"]);
        let producers = foon.producers_of(&goal);
        assert_eq!(producers.len(), 1);
        assert!(foon.producers_of(&obj("sugar", &[], &[])).is_empty());
    }

    #[test]
    fn ids_follow_canonical_order() {
        let foon = merge(&[Subgraph::new("s", vec![stir_unit("stir"), stir_unit("add")])]).unwrap();
        assert_eq!(foon.unit(UnitId(1)).unwrap().motion().label(), "add");
        assert_eq!(foon.unit(UnitId(2)).unwrap().motion().label(), "stir");
        assert!(foon.unit(UnitId(0)).is_none());
        assert!(foon.unit(UnitId(3)).is_none());
    }
}
