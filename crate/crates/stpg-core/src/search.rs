//! Best-first search for the cheapest executable settlement.
//!
//! Nodes are partially settled graphs; the root is the input and a branch
//! settles one group of pairs both ways. Every node is scored with an
//! admissible bound on the cost of its best executable completion, so the
//! first node popped with no binding decision left is optimal: its bound is
//! exact there, and no other node can complete cheaper.
//!
//! The baseline configuration ([`SearchConfig::gses`]) settles one pair per
//! branch, scores nodes by reduced-graph cost, and recomputes longest paths
//! from scratch per node. The improved configuration
//! ([`SearchConfig::igses`]) turns on all four refinements: exact edge
//! grouping, slack-guided branching, the dependency-charge heuristic term,
//! and incremental longest-path maintenance. Every combination of the knobs
//! returns the same optimal cost; they differ in how much work that takes.

use crate::graph::{EdgeState, SettleDirection, Stpg, Tpg, VertexId};
use crate::grouping::{GroupSet, GroupingMode};
use crate::heuristics::{DependencyGraph, SlackView};
use crate::longest_paths::{blpl, blpl_incremental, flpl, flpl_incremental, LongestPathState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Which preset a configuration descends from. Echoed in reports; behavior
/// is fully determined by the other fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Gses,
    Igses,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeuristicMode {
    /// Reduced-graph cost only.
    Plain,
    /// Reduced-graph cost plus the greedy dependency-charge bound.
    Stronger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LongestPathMode {
    /// Recompute longest paths per node.
    Scratch,
    /// Clone the parent's lengths and propagate the new edges' effects.
    Incremental,
}

/// How the branching decision is picked among the binding pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branching {
    /// Uniformly random, from a generator seeded per search.
    Random(u64),
    /// Earliest in the current schedule: smallest planned-edge source
    /// length, then target length.
    EarliestFirst,
    /// Lowest agent id, then pair index.
    AgentFirst,
    /// Most binding planned edge: smallest planned-direction slack.
    SmallestEdgeSlackFirst,
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub algorithm: Algorithm,
    pub grouping: GroupingMode,
    pub branching: Branching,
    pub heuristic: HeuristicMode,
    pub longest_path: LongestPathMode,
    pub time_limit: Option<Duration>,
}

impl SearchConfig {
    /// The baseline: no grouping, agent-order branching, plain bound,
    /// longest paths from scratch.
    pub fn gses() -> SearchConfig {
        SearchConfig {
            algorithm: Algorithm::Gses,
            grouping: GroupingMode::None,
            branching: Branching::AgentFirst,
            heuristic: HeuristicMode::Plain,
            longest_path: LongestPathMode::Scratch,
            time_limit: None,
        }
    }

    /// All four refinements on.
    pub fn igses() -> SearchConfig {
        SearchConfig {
            algorithm: Algorithm::Igses,
            grouping: GroupingMode::Full,
            branching: Branching::SmallestEdgeSlackFirst,
            heuristic: HeuristicMode::Stronger,
            longest_path: LongestPathMode::Incremental,
            time_limit: None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("no executable settlement exists for this input")]
    Unexecutable,
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Optimal { tpg: Tpg, cost: i64 },
    Timeout,
}

/// Where the search spent its time. Scratch-mode cycle detection happens
/// inside the longest-path sweep and counts toward `flpl`; `cycle` covers
/// the final solution check. `other` is the remainder up to `elapsed`:
/// queue handling, cloning, bookkeeping.
#[derive(Debug, Clone, Copy, Default)]
pub struct PhaseTimers {
    pub flpl: Duration,
    pub blpl: Duration,
    pub heuristic: Duration,
    pub branch: Duration,
    pub cycle: Duration,
    pub other: Duration,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub outcome: Outcome,
    /// Nodes popped from the open list, the final one included.
    pub expanded: u64,
    /// Nodes pushed onto the open list, the root included.
    pub generated: u64,
    pub elapsed: Duration,
    pub phases: PhaseTimers,
    /// Pairs pinned by grouping before the search plus, when optimal, all
    /// pairs settled along the returned solution.
    pub settled_edges: usize,
}

/// Hooks into the node stream, for instrumentation and invariant checks in
/// tests. All methods default to doing nothing.
pub trait SearchObserver {
    fn node_generated(&mut self, _stpg: &Stpg, _lp: &LongestPathState) {}
    fn node_popped(&mut self, _h: i64) {}
}

struct NoObserver;

impl SearchObserver for NoObserver {}

struct Node {
    stpg: Stpg,
    lp: LongestPathState,
    h: i64,
    seq: u64,
}

impl Node {
    fn key(&self) -> (i64, usize, u64) {
        (self.h, self.stpg.switchable_count(), self.seq)
    }
}

impl Ord for Node {
    /// Max-heap order arranged to pop: lowest bound, then fewest open
    /// pairs, then most recently pushed.
    fn cmp(&self, other: &Node) -> Ordering {
        let (h0, r0, s0) = self.key();
        let (h1, r1, s1) = other.key();
        h1.cmp(&h0).then(r1.cmp(&r0)).then(s0.cmp(&s1))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Node) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Node) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

fn timed<T>(acc: &mut Duration, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    *acc += t.elapsed();
    out
}

fn heuristic_value(stpg: &Stpg, lp: &LongestPathState, mode: HeuristicMode) -> i64 {
    let base = lp.goal_sum(stpg);
    match mode {
        HeuristicMode::Plain => base,
        HeuristicMode::Stronger => base + DependencyGraph::build(stpg, lp).greedy_cover_bound(),
    }
}

/// Pins every group that contains an unswitchable member: the member's
/// direction is forced, so the whole group follows it. Returns the pinned
/// graph and how many pairs that settled.
fn pre_settle(stpg: &Stpg, groups: &GroupSet) -> (Stpg, usize) {
    let mut fix = Vec::new();
    let mut rev = Vec::new();
    for group in &groups.groups {
        let pinned = group.members.iter().find_map(|&p| match stpg.pair_state(p) {
            EdgeState::Fixed => Some(SettleDirection::Fix),
            EdgeState::Reversed => Some(SettleDirection::Reverse),
            EdgeState::Switchable => None,
        });
        let Some(dir) = pinned else { continue };
        for &p in &group.members {
            if stpg.pair_state(p) == EdgeState::Switchable {
                match dir {
                    SettleDirection::Fix => fix.push(p),
                    SettleDirection::Reverse => rev.push(p),
                }
            }
        }
    }
    let count = fix.len() + rev.len();
    let out = stpg
        .settle(&fix, SettleDirection::Fix)
        .and_then(|g| g.settle(&rev, SettleDirection::Reverse))
        .expect("pinned pairs are switchable");
    (out, count)
}

/// The binding pairs of a node: switchable pairs that delay somebody
/// whichever way they settle. Returns the branching strategy's choice, or
/// `None` when nothing binds and the node is a solution.
fn select_binding(node: &Node, config: &SearchConfig, rng: &mut ChaCha8Rng) -> Option<usize> {
    let sv = SlackView::new(&node.stpg, &node.lp);
    let binding: Vec<usize> = node
        .stpg
        .switchable_pairs()
        .filter(|&k| sv.edge_slack(k) < 0 && sv.reverse_edge_slack(k) < 0)
        .collect();
    if binding.is_empty() {
        return None;
    }
    let pick = match config.branching {
        Branching::Random(_) => binding[rng.gen_range(0..binding.len())],
        Branching::AgentFirst => *binding
            .iter()
            .min_by_key(|&&k| {
                let p = node.stpg.pair(k);
                (p.i_vertex.agent.min(p.j_vertex.agent), k)
            })
            .unwrap(),
        Branching::EarliestFirst => *binding
            .iter()
            .min_by_key(|&&k| {
                let p = node.stpg.pair(k);
                let source =
                    node.stpg.flat(VertexId::new(p.j_vertex.agent, p.j_vertex.step + 1));
                let target = node.stpg.flat(p.i_vertex);
                (node.lp.forward_of(source), node.lp.forward_of(target), k)
            })
            .unwrap(),
        Branching::SmallestEdgeSlackFirst => {
            *binding.iter().min_by_key(|&&k| (sv.edge_slack(k), k)).unwrap()
        }
    };
    Some(pick)
}

/// Settles what remains of a solution node: every pair has a direction
/// whose slack is nonnegative, and adding all of those edges keeps the
/// current lengths valid, so the result is executable at the node's cost.
fn settle_free(node: &Node) -> Tpg {
    let sv = SlackView::new(&node.stpg, &node.lp);
    let mut fix = Vec::new();
    let mut rev = Vec::new();
    for k in node.stpg.switchable_pairs() {
        if sv.edge_slack(k) >= 0 {
            fix.push(k);
        } else {
            debug_assert!(sv.reverse_edge_slack(k) >= 0);
            rev.push(k);
        }
    }
    let settled = node
        .stpg
        .settle(&fix, SettleDirection::Fix)
        .and_then(|g| g.settle(&rev, SettleDirection::Reverse))
        .expect("free pairs are switchable");
    Tpg::new(settled).expect("every pair was settled")
}

pub fn optimize(stpg: &Stpg, config: &SearchConfig) -> Result<SearchResult, SearchError> {
    optimize_observed(stpg, config, &mut NoObserver)
}

/// [`optimize`] with observer hooks on every node.
pub fn optimize_observed(
    stpg: &Stpg,
    config: &SearchConfig,
    observer: &mut dyn SearchObserver,
) -> Result<SearchResult, SearchError> {
    let start = Instant::now();
    let mut phases = PhaseTimers::default();
    let groups = timed(&mut phases.branch, || GroupSet::compute(stpg, config.grouping));
    run(stpg, config, &groups, observer, start, phases)
}

/// [`optimize`] with a precomputed grouping — say, deserialized from a
/// cache built once per plan — instead of computing one from
/// `config.grouping`, which is then only echoed.
pub fn optimize_with_groups(
    stpg: &Stpg,
    config: &SearchConfig,
    groups: &GroupSet,
    observer: &mut dyn SearchObserver,
) -> Result<SearchResult, SearchError> {
    assert_eq!(
        groups.pair_to_group.len(),
        stpg.pair_count(),
        "grouping was built for a different graph"
    );
    run(stpg, config, groups, observer, Instant::now(), PhaseTimers::default())
}

fn run(
    stpg: &Stpg,
    config: &SearchConfig,
    groups: &GroupSet,
    observer: &mut dyn SearchObserver,
    start: Instant,
    mut phases: PhaseTimers,
) -> Result<SearchResult, SearchError> {
    let stronger = config.heuristic == HeuristicMode::Stronger;
    let mut rng = ChaCha8Rng::seed_from_u64(match config.branching {
        Branching::Random(seed) => seed,
        _ => 0,
    });

    let (root_stpg, pinned) = timed(&mut phases.branch, || pre_settle(stpg, groups));
    let total_switchable = pinned + root_stpg.switchable_count();

    let finish = |outcome, expanded, generated, mut phases: PhaseTimers, settled| {
        let elapsed = start.elapsed();
        let named =
            phases.flpl + phases.blpl + phases.heuristic + phases.branch + phases.cycle;
        phases.other = elapsed.saturating_sub(named);
        SearchResult { outcome, expanded, generated, elapsed, phases, settled_edges: settled }
    };

    let mut root_lp = match timed(&mut phases.flpl, || flpl(&root_stpg)) {
        Ok(lp) => lp,
        Err(_) => return Err(SearchError::Unexecutable),
    };
    if stronger {
        timed(&mut phases.blpl, || blpl(&root_stpg, &mut root_lp));
    }
    let root_h = timed(&mut phases.heuristic, || {
        heuristic_value(&root_stpg, &root_lp, config.heuristic)
    });
    observer.node_generated(&root_stpg, &root_lp);
    let mut open = BinaryHeap::new();
    open.push(Node { stpg: root_stpg, lp: root_lp, h: root_h, seq: 0 });
    let mut expanded: u64 = 0;
    let mut generated: u64 = 1;
    let mut seq: u64 = 0;

    loop {
        if let Some(limit) = config.time_limit {
            if start.elapsed() >= limit {
                return Ok(finish(Outcome::Timeout, expanded, generated, phases, pinned));
            }
        }
        let Some(node) = open.pop() else {
            return Err(SearchError::Unexecutable);
        };
        expanded += 1;
        observer.node_popped(node.h);

        let picked = timed(&mut phases.branch, || select_binding(&node, config, &mut rng));
        let Some(picked) = picked else {
            let tpg = timed(&mut phases.branch, || settle_free(&node));
            // Independent check of the returned solution: executable, and
            // exactly as expensive as the node's bound promised.
            let check = timed(&mut phases.cycle, || flpl(tpg.as_stpg()));
            let lp = check.expect("solution graphs are executable");
            let cost = lp.goal_sum(tpg.as_stpg());
            debug_assert_eq!(cost, node.h);
            let outcome = Outcome::Optimal { tpg, cost };
            return Ok(finish(outcome, expanded, generated, phases, total_switchable));
        };

        let group = groups.group_of(picked);
        debug_assert!(group
            .members
            .iter()
            .all(|&p| node.stpg.pair_state(p) == EdgeState::Switchable));
        for dir in [SettleDirection::Fix, SettleDirection::Reverse] {
            let child_stpg = timed(&mut phases.branch, || {
                node.stpg.settle(&group.members, dir).expect("group is switchable")
            });
            let lp = match config.longest_path {
                LongestPathMode::Scratch => {
                    match timed(&mut phases.flpl, || flpl(&child_stpg)) {
                        Ok(mut lp) => {
                            if stronger {
                                timed(&mut phases.blpl, || blpl(&child_stpg, &mut lp));
                            }
                            lp
                        }
                        Err(_) => continue, // settling this way deadlocks
                    }
                }
                LongestPathMode::Incremental => {
                    let new_edges = node.stpg.edges_for(&group.members, dir);
                    let mut lp = node.lp.clone();
                    if stronger {
                        let r = timed(&mut phases.blpl, || {
                            blpl_incremental(&mut lp, &child_stpg, &new_edges)
                        });
                        if r.is_err() {
                            continue;
                        }
                    }
                    let r = timed(&mut phases.flpl, || {
                        flpl_incremental(&mut lp, &child_stpg, &new_edges)
                    });
                    if r.is_err() {
                        continue;
                    }
                    lp
                }
            };
            let h = timed(&mut phases.heuristic, || {
                heuristic_value(&child_stpg, &lp, config.heuristic)
            });
            observer.node_generated(&child_stpg, &lp);
            seq += 1;
            generated += 1;
            open.push(Node { stpg: child_stpg, lp, h, seq });
        }
    }
}
