//! `foon`: merge demonstration subgraphs, retrieve task trees and plan
//! human-assisted execution from the command line.
//!
//! Exit codes: 0 success, 2 usage error, 3 parse or I/O error, 4 goal not
//! producible, 5 no executable task tree, 6 M too large for every tree,
//! 7 expansion limit exceeded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use foon_core::collaboration::DEFAULT_EPSILON;
use foon_core::export::{network_to_dot, plan_to_dot, StructuredDocument};
use foon_core::{
    best_plan, failure_report, greedy_retrieve, merge, optimal_m, parse_item, parse_kitchen, parse_profile,
    parse_subgraph, retrieve_all, simulate, sweep, tree_metrics, write_subgraph, DelegationPlan, Error, Executor,
    ExpansionLimits, FunctionalUnit, KitchenInventory, ObjectNode, RobotProfile, Subgraph, TaskTree,
    UniversalFoon,
};

#[derive(Parser)]
#[command(name = "foon", version, about = "Task planning over a weighted FOON")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Merge subgraphs into one deduplicated network.
    Merge {
        #[command(flatten)]
        input: NetworkArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Pick the best task tree and delegate steps to a human assistant.
    Retrieve {
        #[command(flatten)]
        task: TaskArgs,
        #[command(flatten)]
        delegation: DelegationArgs,
        /// Use the kitchen-driven greedy search instead of full enumeration.
        #[arg(long)]
        greedy: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// List every executable task tree for the goal.
    Enumerate {
        #[command(flatten)]
        task: TaskArgs,
    },
    /// Best success probability for each number of human steps.
    Sweep {
        #[command(flatten)]
        task: TaskArgs,
        /// Largest M to report; defaults to the longest tree minus one.
        #[arg(long)]
        max_m: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo execution of the best plan.
    Simulate {
        #[command(flatten)]
        task: TaskArgs,
        #[command(flatten)]
        delegation: DelegationArgs,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Write the network, or the best plan when a goal is given, as DOT or JSON.
    Export {
        #[command(flatten)]
        input: NetworkArgs,
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long)]
        goal: Option<String>,
        #[arg(long, requires = "goal")]
        kitchen: Option<PathBuf>,
        #[command(flatten)]
        delegation: DelegationArgs,
        #[command(flatten)]
        limits: LimitArgs,
        #[arg(long, value_enum, default_value_t = Format::Structured)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct NetworkArgs {
    /// Subgraph files to merge.
    subgraphs: Vec<PathBuf>,
    /// A network in subgraph format or a structured JSON document.
    #[arg(long)]
    network: Option<PathBuf>,
}

#[derive(Args)]
struct TaskArgs {
    #[command(flatten)]
    input: NetworkArgs,
    /// Goal object, e.g. `cup{contains}[tea,water]`.
    #[arg(long)]
    goal: String,
    #[arg(long)]
    kitchen: PathBuf,
    /// Robot profile (TOML). Optional when the network document carries one.
    #[arg(long)]
    profile: Option<PathBuf>,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long, default_value_t = ExpansionLimits::default().max_nodes)]
    max_nodes: usize,
    #[arg(long, default_value_t = ExpansionLimits::default().max_children)]
    max_children: usize,
    #[arg(long, default_value_t = ExpansionLimits::default().max_depth)]
    max_depth: usize,
}

#[derive(Args)]
struct DelegationArgs {
    /// Number of human steps; chosen by the epsilon rule when omitted.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Dot,
    Structured,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::GoalNotProducible(_) => 4,
            Error::NoExecutableTree | Error::NoTrees | Error::PlanningFailure(_) => 5,
            Error::MExceedsAllTrees(_) | Error::AssistantWouldPerformEntireTask { .. } => 6,
            Error::ExpansionLimitExceeded { .. } => 7,
            Error::InvalidEpsilon(_) => 2,
            _ => 3,
        };
        Failure { code, message: e.to_string() }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: 3,
        message: format!("{}: {e}", path.display()),
    })
}

fn in_file(path: &Path, e: Error) -> Failure {
    let mut f = Failure::from(e);
    f.message = format!("{}: {}", path.display(), f.message);
    f
}

fn emit(text: &str, out: Option<&Path>) -> Outcome {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure {
            code: 3,
            message: format!("{}: {e}", path.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

struct Loaded {
    foon: UniversalFoon,
    units_in: usize,
    /// Profile embedded in a structured network document.
    profile: Option<RobotProfile>,
}

fn load_network(args: &NetworkArgs) -> Outcome<Loaded> {
    if args.subgraphs.is_empty() && args.network.is_none() {
        return Err(Failure::usage("no network given: pass subgraph files or --network"));
    }
    let mut parts: Vec<Subgraph> = Vec::new();
    let mut profile = None;
    if let Some(path) = &args.network {
        let text = read(path)?;
        if text.trim_start().starts_with('{') {
            let doc = StructuredDocument::from_json(&text).map_err(|e| in_file(path, e))?;
            parts.push(doc.network().map_err(|e| in_file(path, e))?.to_subgraph("network"));
            profile = doc.robot_profile().map_err(|e| in_file(path, e))?;
        } else {
            parts.push(parse_subgraph(&text).map_err(|e| in_file(path, e))?);
        }
    }
    for path in &args.subgraphs {
        parts.push(parse_subgraph(&read(path)?).map_err(|e| in_file(path, e))?);
    }
    let units_in = parts.iter().map(|p| p.units.len()).sum();
    let foon = merge(&parts)?;
    Ok(Loaded { foon, units_in, profile })
}

fn load_kitchen(path: &Path) -> Outcome<KitchenInventory> {
    parse_kitchen(&read(path)?).map_err(|e| in_file(path, e))
}

fn load_profile(path: Option<&Path>, embedded: Option<RobotProfile>) -> Outcome<RobotProfile> {
    match (path, embedded) {
        (Some(path), _) => parse_profile(&read(path)?).map_err(|e| in_file(path, e)),
        (None, Some(profile)) => Ok(profile),
        (None, None) => Err(Failure::usage("no robot profile: pass --profile")),
    }
}

fn goal_of(text: &str) -> Outcome<ObjectNode> {
    parse_item(text).map_err(|e| Failure::usage(format!("--goal: {e}")))
}

impl LimitArgs {
    fn limits(&self) -> ExpansionLimits {
        ExpansionLimits {
            max_nodes: self.max_nodes,
            max_children: self.max_children,
            max_depth: self.max_depth,
        }
    }
}

struct Task {
    foon: UniversalFoon,
    goal: ObjectNode,
    kitchen: KitchenInventory,
    profile: Option<RobotProfile>,
}

impl TaskArgs {
    fn load(&self, needs_profile: bool) -> Outcome<Task> {
        let loaded = load_network(&self.input)?;
        let goal = goal_of(&self.goal)?;
        let kitchen = load_kitchen(&self.kitchen)?;
        let profile = if needs_profile || self.profile.is_some() {
            Some(load_profile(self.profile.as_deref(), loaded.profile)?)
        } else {
            loaded.profile
        };
        Ok(Task { foon: loaded.foon, goal, kitchen, profile })
    }
}

fn all_trees(task: &Task, limits: ExpansionLimits) -> Outcome<Vec<TaskTree>> {
    let trees = retrieve_all(&task.foon, &task.goal, &task.kitchen, limits)?;
    if trees.is_empty() {
        return Err(Error::NoExecutableTree.into());
    }
    Ok(trees)
}

fn choose_plan(trees: &[TaskTree], profile: &RobotProfile, args: &DelegationArgs) -> Outcome<(DelegationPlan, usize)> {
    let m = match args.m {
        Some(m) => m,
        None => optimal_m(trees, profile, args.epsilon)?,
    };
    let best = best_plan(trees, profile, m)?;
    Ok((best.primary().clone(), best.co_optimal_plans().len()))
}

fn join_objects(objects: &[ObjectNode]) -> String {
    objects.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn step_line(n: usize, unit: &FunctionalUnit, executor: Executor, rate: f64) -> String {
    let id = unit.id().expect("plan units come from a network");
    match executor {
        Executor::Robot => format!(
            "{n:>3}. [ROBOT {rate:.4}] unit {id}: {} {} -> {}",
            unit.motion().label(),
            join_objects(unit.inputs()),
            join_objects(unit.outputs())
        ),
        Executor::Human => format!(
            "{n:>3}. [HUMAN {rate:.4}] unit {id}: please {} {} to get {}",
            unit.motion().label(),
            join_objects(unit.inputs()),
            join_objects(unit.outputs())
        ),
    }
}

fn plan_text(plan: &DelegationPlan, goal: &ObjectNode, trees: usize, co_optimal: usize) -> String {
    let mut out = format!("goal: {goal}\ntrees: {trees}\nm: {}\n", plan.m);
    let steps = plan.tree.units.iter().zip(plan.assignment.iter().zip(&plan.rates));
    for (i, (unit, (&executor, rate))) in steps.enumerate() {
        out.push_str(&step_line(i + 1, unit, executor, rate.get()));
        out.push('\n');
    }
    out.push_str(&format!("total_success: {:.6}\n", plan.total_success));
    if co_optimal > 1 {
        out.push_str(&format!("co-optimal plans: {co_optimal}\n"));
    }
    out
}

fn render_plan(
    plan: &DelegationPlan,
    format: Format,
    foon: &UniversalFoon,
    profile: &RobotProfile,
    text: impl FnOnce() -> String,
) -> String {
    match format {
        Format::Text => text(),
        Format::Dot => plan_to_dot(plan),
        Format::Structured => StructuredDocument::for_network(foon).with_profile(profile).with_plan(plan).to_json(),
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Merge { input, output } => {
            let loaded = load_network(&input)?;
            eprintln!("{} units in, {} after merge", loaded.units_in, loaded.foon.len());
            let text = match output.format {
                Format::Text => write_subgraph(&loaded.foon.to_subgraph("merged")),
                Format::Dot => network_to_dot(&loaded.foon),
                Format::Structured => StructuredDocument::for_network(&loaded.foon).to_json(),
            };
            emit(&text, output.out.as_deref())
        }
        Command::Retrieve { task, delegation, greedy, output } => {
            let limits = task.limits.limits();
            let task = task.load(true)?;
            let profile = task.profile.as_ref().expect("profile loaded");
            let trees = if greedy {
                vec![greedy_retrieve(&task.foon, &task.goal, &task.kitchen)?]
            } else {
                all_trees(&task, limits)?
            };
            let (plan, co_optimal) = choose_plan(&trees, profile, &delegation)?;
            let text = render_plan(&plan, output.format, &task.foon, profile, || {
                plan_text(&plan, &task.goal, trees.len(), co_optimal)
            });
            emit(&text, output.out.as_deref())
        }
        Command::Enumerate { task } => {
            let limits = task.limits.limits();
            let task = task.load(false)?;
            let trees = all_trees(&task, limits)?;
            println!("goal: {}\ntrees: {}", task.goal, trees.len());
            for (i, tree) in trees.iter().enumerate() {
                let metrics = tree_metrics(tree);
                let order: Vec<String> = tree.unit_ids().iter().map(ToString::to_string).collect();
                let mut line = format!(
                    "tree {}: {} steps, depth {}, order {}",
                    i + 1,
                    metrics.length,
                    metrics.depth,
                    order.join(" -> ")
                );
                if let Some(profile) = &task.profile {
                    line.push_str(&format!(", success {:.6}", foon_core::joint_success(tree, profile)));
                }
                println!("{line}");
            }
            Ok(())
        }
        Command::Sweep { task, max_m, out } => {
            let limits = task.limits.limits();
            let task = task.load(true)?;
            let trees = all_trees(&task, limits)?;
            let longest = trees.iter().map(TaskTree::len).max().unwrap_or(1);
            let max_m = max_m.unwrap_or(longest.saturating_sub(1));
            let report = sweep(&trees, task.profile.as_ref().expect("profile loaded"), max_m)?;
            for m in report.drops() {
                eprintln!("note: best success drops at m = {m}: the previous best tree is no longer eligible");
            }
            emit(&report.to_table(), out.as_deref())
        }
        Command::Simulate { task, delegation, trials, seed, output } => {
            if trials == 0 {
                return Err(Failure::usage("--trials must be at least 1"));
            }
            let limits = task.limits.limits();
            let task = task.load(true)?;
            let profile = task.profile.as_ref().expect("profile loaded");
            let trees = all_trees(&task, limits)?;
            let (plan, _) = choose_plan(&trees, profile, &delegation)?;
            let result = simulate(&plan, trials, seed);
            let text = match output.format {
                Format::Structured => StructuredDocument::for_network(&task.foon)
                    .with_profile(profile)
                    .with_plan(&plan)
                    .with_simulation(&result)
                    .to_json(),
                Format::Dot => plan_to_dot(&plan),
                Format::Text => {
                    let mut out = format!(
                        "m: {}\ntrials: {}\nsuccesses: {}\nempirical: {:.6}\nanalytic: {:.6}\nstandard error: {:.6}\nseed: {}\n",
                        plan.m,
                        result.trials,
                        result.successes,
                        result.empirical_rate,
                        result.analytic_rate,
                        result.standard_error(),
                        result.seed
                    );
                    let failures = failure_report(&result);
                    if !failures.is_empty() {
                        out.push_str("failures:\n");
                    }
                    for (id, count) in failures {
                        let motion = task.foon.unit(id).map(|u| u.motion().label()).unwrap_or("?");
                        out.push_str(&format!("  unit {id} {motion}: {count}\n"));
                    }
                    out
                }
            };
            emit(&text, output.out.as_deref())
        }
        Command::Export { input, profile, goal, kitchen, delegation, limits, format, out } => {
            if format == Format::Text {
                return Err(Failure::usage("export writes `dot` or `structured`; use `merge` for text"));
            }
            let loaded = load_network(&input)?;
            let embedded = loaded.profile.clone();
            let Some(goal) = goal else {
                let text = match format {
                    Format::Dot => network_to_dot(&loaded.foon),
                    _ => {
                        let mut doc = StructuredDocument::for_network(&loaded.foon);
                        if let Some(p) = profile.as_deref().map(|p| load_profile(Some(p), None)).transpose()? {
                            doc = doc.with_profile(&p);
                        } else if let Some(p) = &embedded {
                            doc = doc.with_profile(p);
                        }
                        doc.to_json()
                    }
                };
                return emit(&text, out.as_deref());
            };
            let kitchen = kitchen.ok_or_else(|| Failure::usage("--goal needs --kitchen"))?;
            let task = Task {
                goal: goal_of(&goal)?,
                kitchen: load_kitchen(&kitchen)?,
                profile: Some(load_profile(profile.as_deref(), embedded)?),
                foon: loaded.foon,
            };
            let profile = task.profile.as_ref().expect("profile loaded");
            let trees = all_trees(&task, limits.limits())?;
            let (plan, _) = choose_plan(&trees, profile, &delegation)?;
            let text = render_plan(&plan, format, &task.foon, profile, String::new);
            emit(&text, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
