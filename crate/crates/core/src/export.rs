//! Graph exports: Graphviz DOT for viewing and a versioned JSON document
//! that round-trips networks, profiles, plans and simulation results.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::collaboration::{DelegationPlan, Executor};
use crate::error::{Error, Result};
use crate::model::{FunctionalUnit, MotionNode, ObjectKey, ObjectNode, UnitId, UniversalFoon};
use crate::profile::{Rate, RobotProfile};
use crate::simulation::SimulationResult;

pub const SCHEMA_NAME: &str = "foon-structured";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum GraphNode {
    Object(ObjectKey),
    Motion(UnitId),
}

/// Object and motion nodes of a set of units, objects shared by identity.
#[derive(Clone, Debug, Default)]
pub struct BipartiteView {
    pub objects: BTreeMap<ObjectKey, ObjectNode>,
    pub motions: Vec<(UnitId, MotionNode)>,
    pub edges: Vec<(GraphNode, GraphNode)>,
}

impl BipartiteView {
    pub fn of(units: &[FunctionalUnit]) -> Self {
        let mut view = BipartiteView::default();
        for unit in units {
            let id = unit.id().expect("exported units come from a network");
            view.motions.push((id, unit.motion().clone()));
            for input in unit.inputs() {
                let key = input.identity();
                view.objects.entry(key.clone()).or_insert_with(|| input.clone());
                view.edges.push((GraphNode::Object(key), GraphNode::Motion(id)));
            }
            for output in unit.outputs() {
                let key = output.identity();
                view.objects.entry(key.clone()).or_insert_with(|| output.clone());
                view.edges.push((GraphNode::Motion(id), GraphNode::Object(key)));
            }
        }
        view
    }

    pub fn node_count(&self) -> usize {
        self.objects.len() + self.motions.len()
    }

    /// Every edge joins an object to a motion.
    pub fn is_bipartite(&self) -> bool {
        self.edges.iter().all(|(a, b)| {
            matches!(
                (a, b),
                (GraphNode::Object(_), GraphNode::Motion(_)) | (GraphNode::Motion(_), GraphNode::Object(_))
            )
        })
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn object_label(node: &ObjectNode) -> String {
    let mut label = dot_escape(node.label());
    if !node.states().is_empty() {
        let states: Vec<&str> = node.states().iter().map(String::as_str).collect();
        let _ = write!(label, "\\n{{{}}}", dot_escape(&states.join(",")));
    }
    if !node.ingredients().is_empty() {
        let ings: Vec<&str> = node.ingredients().iter().map(String::as_str).collect();
        let _ = write!(label, "\\n[{}]", dot_escape(&ings.join(",")));
    }
    label
}

fn render_dot(view: &BipartiteView, annotations: &BTreeMap<UnitId, String>) -> String {
    let object_ids: BTreeMap<&ObjectKey, usize> = view.objects.keys().enumerate().map(|(i, k)| (k, i)).collect();
    let name = |n: &GraphNode| match n {
        GraphNode::Object(k) => format!("o{}", object_ids[k]),
        GraphNode::Motion(id) => format!("m{id}"),
    };

    let mut out = String::from("digraph foon {\n  rankdir=TB;\n");
    for (key, node) in &view.objects {
        let _ = writeln!(
            out,
            "  o{} [label=\"{}\", shape=ellipse, class=\"object\"];",
            object_ids[key],
            object_label(node)
        );
    }
    for (id, motion) in &view.motions {
        let mut label = format!("{}: {}", id, dot_escape(motion.label()));
        let mut style = String::new();
        if let Some(note) = annotations.get(id) {
            let _ = write!(label, "\\n{note}");
            if note.starts_with("HUMAN") {
                style.push_str(", style=filled, fillcolor=\"lightblue\"");
            }
        }
        let _ = writeln!(out, "  m{id} [label=\"{label}\", shape=box, class=\"motion\"{style}];");
    }
    for (from, to) in &view.edges {
        let _ = writeln!(out, "  {} -> {};", name(from), name(to));
    }
    out.push_str("}\n");
    out
}

pub fn network_to_dot(foon: &UniversalFoon) -> String {
    render_dot(&BipartiteView::of(foon.units()), &BTreeMap::new())
}

/// A plan's units with executor and effective rate on each motion node.
pub fn plan_to_dot(plan: &DelegationPlan) -> String {
    let annotations = plan
        .tree
        .units
        .iter()
        .zip(plan.assignment.iter().zip(&plan.rates))
        .filter_map(|(u, (e, r))| Some((u.id()?, format!("{e} {r}"))))
        .collect();
    render_dot(&BipartiteView::of(&plan.tree.units), &annotations)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectRecord {
    pub label: String,
    #[serde(default)]
    pub states: Vec<String>,
    #[serde(default)]
    pub ingredients: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitRecord {
    pub id: UnitId,
    pub motion: String,
    pub inputs: Vec<ObjectRecord>,
    pub outputs: Vec<ObjectRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    #[serde(default)]
    pub name: String,
    pub default: f64,
    pub assistant: f64,
    #[serde(default)]
    pub motions: BTreeMap<String, f64>,
    #[serde(default)]
    pub units: BTreeMap<UnitId, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub unit: UnitId,
    pub motion: String,
    pub executor: Executor,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub goal: String,
    pub m: usize,
    pub total_success: f64,
    pub steps: Vec<StepRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub trials: u64,
    pub successes: u64,
    pub empirical_rate: f64,
    pub analytic_rate: f64,
    pub seed: u64,
    pub failures: BTreeMap<UnitId, u64>,
}

/// Top-level structured document. `schema` and `version` are mandatory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructuredDocument {
    pub schema: String,
    pub version: u32,
    pub units: Vec<UnitRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationRecord>,
}

fn object_record(node: &ObjectNode) -> ObjectRecord {
    ObjectRecord {
        label: node.label().to_string(),
        states: node.states().iter().cloned().collect(),
        ingredients: node.ingredients().iter().cloned().collect(),
    }
}

fn unit_record(unit: &FunctionalUnit) -> UnitRecord {
    UnitRecord {
        id: unit.id().expect("exported units come from a network"),
        motion: unit.motion().label().to_string(),
        inputs: unit.inputs().iter().map(object_record).collect(),
        outputs: unit.outputs().iter().map(object_record).collect(),
    }
}

pub fn profile_record(profile: &RobotProfile) -> ProfileRecord {
    ProfileRecord {
        name: profile.name.clone(),
        default: profile.default_rate.get(),
        assistant: profile.assistant_rate.get(),
        motions: profile
            .motion_rates
            .iter()
            .map(|(k, r)| (k.clone(), r.get()))
            .collect(),
        units: profile.unit_rates.iter().map(|(k, r)| (*k, r.get())).collect(),
    }
}

pub fn plan_record(plan: &DelegationPlan) -> PlanRecord {
    PlanRecord {
        goal: plan.tree.goal.to_string(),
        m: plan.m,
        total_success: plan.total_success,
        steps: plan
            .tree
            .units
            .iter()
            .zip(plan.assignment.iter().zip(&plan.rates))
            .map(|(u, (e, r))| StepRecord {
                unit: u.id().expect("plan units come from a network"),
                motion: u.motion().label().to_string(),
                executor: *e,
                rate: r.get(),
            })
            .collect(),
    }
}

pub fn simulation_record(result: &SimulationResult) -> SimulationRecord {
    SimulationRecord {
        trials: result.trials,
        successes: result.successes,
        empirical_rate: result.empirical_rate,
        analytic_rate: result.analytic_rate,
        seed: result.seed,
        failures: result.per_unit_failure_counts.clone(),
    }
}

impl StructuredDocument {
    pub fn new(units: &[FunctionalUnit]) -> Self {
        StructuredDocument {
            schema: SCHEMA_NAME.to_string(),
            version: SCHEMA_VERSION,
            units: units.iter().map(unit_record).collect(),
            profile: None,
            plan: None,
            simulation: None,
        }
    }

    pub fn for_network(foon: &UniversalFoon) -> Self {
        Self::new(foon.units())
    }

    pub fn with_profile(mut self, profile: &RobotProfile) -> Self {
        self.profile = Some(profile_record(profile));
        self
    }

    pub fn with_plan(mut self, plan: &DelegationPlan) -> Self {
        self.plan = Some(plan_record(plan));
        self
    }

    pub fn with_simulation(mut self, result: &SimulationResult) -> Self {
        self.simulation = Some(simulation_record(result));
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: StructuredDocument =
            serde_json::from_str(text).map_err(|e| Error::Structured(e.to_string()))?;
        if doc.schema != SCHEMA_NAME {
            return Err(Error::Structured(format!("unknown schema `{}`", doc.schema)));
        }
        if doc.version != SCHEMA_VERSION {
            return Err(Error::Structured(format!("unsupported version {}", doc.version)));
        }
        Ok(doc)
    }

    /// Rebuilds the network. Recorded ids must agree with the canonical ids,
    /// otherwise per-unit rates would attach to the wrong units.
    pub fn network(&self) -> Result<UniversalFoon> {
        let mut units = Vec::with_capacity(self.units.len());
        for rec in &self.units {
            let objects = |recs: &[ObjectRecord]| -> Result<Vec<ObjectNode>> {
                recs.iter()
                    .map(|r| {
                        let mut node = ObjectNode::new(r.label.clone())?;
                        for s in &r.states {
                            node.add_state(s.clone());
                        }
                        for i in &r.ingredients {
                            node.add_ingredient(i.clone());
                        }
                        Ok(node)
                    })
                    .collect()
            };
            units.push(FunctionalUnit::new(
                objects(&rec.inputs)?,
                MotionNode::new(rec.motion.clone())?,
                objects(&rec.outputs)?,
            )?);
        }
        let foon = UniversalFoon::from_units(units);
        if foon.len() != self.units.len() {
            return Err(Error::Structured("duplicate units in document".into()));
        }
        for rec in &self.units {
            let matches = foon.unit(rec.id).is_some_and(|u| {
                u.motion().label() == rec.motion
                    && u.inputs().iter().map(object_record).eq(rec.inputs.iter().cloned())
                    && u.outputs().iter().map(object_record).eq(rec.outputs.iter().cloned())
            });
            if !matches {
                return Err(Error::Structured(format!(
                    "unit {} does not match its canonical id",
                    rec.id
                )));
            }
        }
        Ok(foon)
    }

    pub fn robot_profile(&self) -> Result<Option<RobotProfile>> {
        let Some(rec) = &self.profile else {
            return Ok(None);
        };
        let mut profile = RobotProfile::new(rec.name.clone(), Rate::checked("default", rec.default)?)
            .with_assistant(Rate::checked("assistant", rec.assistant)?);
        for (motion, &r) in &rec.motions {
            profile = profile.with_motion(motion, Rate::checked(&format!("motions.{motion}"), r)?);
        }
        for (&id, &r) in &rec.units {
            profile = profile.with_unit(id, Rate::checked(&format!("units.{id}"), r)?);
        }
        Ok(Some(profile))
    }
}
