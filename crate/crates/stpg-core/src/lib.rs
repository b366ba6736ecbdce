//! Execution-order optimization for delayed multi-agent plans.
//!
//! A multi-agent plan that was conflict-free on paper stops being optimal the
//! moment one robot is delayed. This crate keeps the *routes* of the original
//! plan but re-optimizes the *passing order* at shared locations: the plan is
//! compiled into a temporal plan graph (TPG), the inter-agent ordering edges
//! are made switchable, and a best-first search over partial orderings finds
//! the acyclic graph with the minimum sum of goal arrival times.
//!
//! Module layout:
//! - [`plan`]: plan validation, TPG construction, delay injection, scenarios
//! - [`graph`]: the switchable TPG itself (settling, cycles, simulation)
//! - [`longest_paths`]: forward/backward longest paths, from scratch and
//!   incrementally under edge insertion
//! - [`heuristics`]: slack-based admissible lower bounds
//! - [`grouping`]: edges that provably settle together
//! - [`search`]: the best-first search over partial settlements
//! - [`oracle`]: brute-force reference implementations used by tests
//! - [`synth`]: deterministic random instance generation for tests and benches

pub mod graph;
pub mod grouping;
pub mod heuristics;
pub mod longest_paths;
pub mod oracle;
pub mod plan;
pub mod search;
pub mod synth;

#[cfg(test)]
pub(crate) mod fixtures;

pub use graph::{
    simulate_execution, AgentChain, EdgeState, ExecutionOutcome, GraphError, ReducedView,
    SettleDirection, Stpg, Tpg, Type2Pair, VertexId,
};
pub use grouping::{EdgeGroup, GroupSet, GroupingMode, OrderedPairSubgraph};
pub use heuristics::{DependencyGraph, HeuristicError, SlackView};
pub use longest_paths::{LongestPathState, LpError};
pub use plan::{
    apply_delays, build_tpg, generate_scenario, to_stpg, validate_plan, ConflictKind,
    ConflictReport, DelayEntry, DelayScenario, GridMap, MapfPlan, PlanError, ScenarioMode,
};
pub use search::{
    optimize, optimize_observed, optimize_with_groups, Algorithm, Branching, HeuristicMode,
    LongestPathMode, Outcome, PhaseTimers, SearchConfig, SearchError, SearchObserver,
    SearchResult,
};
