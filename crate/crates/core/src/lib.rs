//! Task planning over a weighted functional object-oriented network (FOON).
//!
//! A FOON is a bipartite graph of object nodes and motion nodes grouped into
//! functional units. This crate merges demonstration subgraphs into a
//! universal network, enumerates every task tree that reaches a goal object,
//! scores trees by the joint success probability of a robot profile, picks
//! which steps a human assistant should take over, and checks plans with a
//! Monte Carlo executor.

pub mod collaboration;
pub mod error;
pub mod export;
pub mod model;
pub mod parse;
pub mod profile;
pub mod retrieval;
pub mod simulation;

pub use collaboration::{
    assign_human_steps, best_plan, joint_success, optimal_m, sweep, unit_rate, BestPlan,
    DelegationPlan, Executor, SweepReport,
};
pub use error::{Error, Result};
pub use model::{
    merge, object_identity, unit_equals, FunctionalUnit, MotionNode, ObjectKey, ObjectNode,
    Subgraph, UnitId, UniversalFoon,
};
pub use parse::{parse_item, parse_kitchen, parse_subgraph, write_subgraph, KitchenInventory};
pub use profile::{parse_profile, Rate, RobotProfile};
pub use retrieval::{
    build_path_forest, enumerate_task_trees, find_roots, greedy_retrieve, retrieve_all,
    tree_metrics, ExpansionLimits, PathForest, TaskTree,
};
pub use simulation::{failure_report, simulate, SimulationResult};
