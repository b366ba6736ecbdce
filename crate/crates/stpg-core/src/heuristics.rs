//! Admissible cost bounds for partially settled graphs.
//!
//! The baseline bound on any completion's cost is the current reduced
//! graph's cost: settling only adds edges, so arrival times only grow. The
//! stronger bound adds a second term: every still-open ordering decision
//! forces a quantifiable arrival increase on one of its two agents
//! whichever way it goes, and charging a vertex-disjoint selection of those
//! increases stays a lower bound.
//!
//! Slack is the running currency. An edge's slack says how much later its
//! source could get before pushing its target; a vertex's slack toward a
//! goal says how much later the vertex could get before pushing that goal.

use crate::graph::{Stpg, VertexId};
use crate::longest_paths::LongestPathState;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HeuristicError {
    #[error("goal of agent {goal_agent} is unreachable from {from:?}")]
    UnreachableGoal { from: VertexId, goal_agent: u32 },
}

/// Slack queries over one graph and its longest-path lengths.
pub struct SlackView<'a> {
    stpg: &'a Stpg,
    lp: &'a LongestPathState,
}

impl<'a> SlackView<'a> {
    pub fn new(stpg: &'a Stpg, lp: &'a LongestPathState) -> SlackView<'a> {
        SlackView { stpg, lp }
    }

    /// Slack of pair `k`'s planned-direction edge: how much the earlier
    /// visitor's departure may slip before the later visitor's entry moves.
    /// Negative means the edge would push the entry time if enforced.
    pub fn edge_slack(&self, k: usize) -> i64 {
        let p = self.stpg.pair(k);
        let source = VertexId::new(p.j_vertex.agent, p.j_vertex.step + 1);
        self.lp.forward_at(self.stpg, p.i_vertex) - self.lp.forward_at(self.stpg, source) - 1
    }

    /// Slack of pair `k`'s flipped edge. At most one of the two slacks can
    /// be nonnegative; a pair whose both slacks are negative delays someone
    /// no matter which way it settles.
    pub fn reverse_edge_slack(&self, k: usize) -> i64 {
        let p = self.stpg.pair(k);
        debug_assert!(p.i_vertex.step < self.stpg.z(p.i_vertex.agent), "pair cannot flip");
        let source = VertexId::new(p.i_vertex.agent, p.i_vertex.step + 1);
        self.lp.forward_at(self.stpg, p.j_vertex) - self.lp.forward_at(self.stpg, source) - 1
    }

    /// How much `v` may slip before agent `goal_agent`'s goal slips with
    /// it. Zero when `v` lies on a critical path to that goal; an error when
    /// no path reaches the goal at all.
    pub fn vertex_slack(&self, v: VertexId, goal_agent: u32) -> Result<i64, HeuristicError> {
        let flat = self.stpg.flat(v);
        let to_goal = self
            .lp
            .backward_of(flat, goal_agent)
            .ok_or(HeuristicError::UnreachableGoal { from: v, goal_agent })?;
        let goal_len = self.lp.forward_at(self.stpg, self.stpg.goal(goal_agent));
        Ok(goal_len - self.lp.forward_of(flat) - to_goal)
    }
}

/// Guaranteed arrival increases between agent pairs, as weights on an
/// undirected agent graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    weights: BTreeMap<(u32, u32), i64>,
}

impl DependencyGraph {
    /// Charges every open pair whose both directions are binding. Keeping
    /// the planned direction delays the later visitor's goal by at least
    /// the edge's slack deficit minus the entry vertex's own slack; flipping
    /// delays the earlier visitor's goal likewise. The smaller of the two is
    /// unavoidable, and the heaviest such charge per agent pair is kept.
    ///
    /// Needs backward lengths in `lp`.
    pub fn build(stpg: &Stpg, lp: &LongestPathState) -> DependencyGraph {
        let sv = SlackView::new(stpg, lp);
        let mut weights = BTreeMap::new();
        for k in stpg.switchable_pairs() {
            let sl_e = sv.edge_slack(k);
            if sl_e >= 0 {
                continue;
            }
            let sl_r = sv.reverse_edge_slack(k);
            if sl_r >= 0 {
                continue;
            }
            let pair = stpg.pair(k);
            let (m, n) = (pair.i_vertex.agent, pair.j_vertex.agent);
            let own = sv.vertex_slack(pair.i_vertex, m).expect("goal lies on own chain");
            let other = sv.vertex_slack(pair.j_vertex, n).expect("goal lies on own chain");
            let w = (-sl_e - own).min(-sl_r - other);
            if w <= 0 {
                continue;
            }
            let key = (m.min(n), m.max(n));
            let slot = weights.entry(key).or_insert(0);
            *slot = (*slot).max(w);
        }
        DependencyGraph { weights }
    }

    /// Builds directly from `((agent, agent), weight)` entries, for
    /// cross-checking the greedy bound against exact solvers on synthetic
    /// graphs. Keys are normalized to `(min, max)`; nonpositive weights and
    /// self-loops are dropped; duplicate keys keep the heaviest weight.
    pub fn from_weights(entries: impl IntoIterator<Item = ((u32, u32), i64)>) -> DependencyGraph {
        let mut weights = BTreeMap::new();
        for ((a, b), w) in entries {
            if a == b || w <= 0 {
                continue;
            }
            let slot = weights.entry((a.min(b), a.max(b))).or_insert(0);
            *slot = (*slot).max(w);
        }
        DependencyGraph { weights }
    }

    /// Sum of a greedily picked vertex-disjoint set of weights: heaviest
    /// first, ties by agent pair. Lower-bounds the exact covering optimum,
    /// which itself lower-bounds the real total increase.
    pub fn greedy_cover_bound(&self) -> i64 {
        let mut edges: Vec<(&(u32, u32), &i64)> = self.weights.iter().collect();
        edges.sort_by_key(|&(key, &w)| (std::cmp::Reverse(w), *key));
        let mut used = std::collections::BTreeSet::new();
        let mut bound = 0;
        for (&(m, n), &w) in edges {
            if !used.contains(&m) && !used.contains(&n) {
                used.insert(m);
                used.insert(n);
                bound += w;
            }
        }
        bound
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Positive weights as `(agent, agent, weight)`, for cross-checking
    /// against exact solvers.
    pub fn weighted_edges(&self) -> impl Iterator<Item = (u32, u32, i64)> + '_ {
        self.weights.iter().map(|(&(m, n), &w)| (m, n, w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{corridor, handoff};
    use crate::graph::SettleDirection;
    use crate::longest_paths::{blpl, flpl};
    use crate::oracle::{enumerate_optimal, exact_ewmvc};

    fn with_backward(stpg: &Stpg) -> LongestPathState {
        let mut lp = flpl(stpg).unwrap();
        blpl(stpg, &mut lp);
        lp
    }

    #[test]
    fn slacks_on_the_delayed_handoff() {
        let g = handoff(true);
        let lp = with_backward(&g);
        let sv = SlackView::new(&g, &lp);
        assert_eq!(sv.edge_slack(0), -3); // entry at 2, exit not before 4
        assert_eq!(sv.reverse_edge_slack(0), -1);
        // Both shared-cell vertices sit on their goals' critical paths.
        assert_eq!(sv.vertex_slack(VertexId::new(1, 2), 1), Ok(0));
        assert_eq!(sv.vertex_slack(VertexId::new(0, 1), 0), Ok(0));
        assert_eq!(
            sv.vertex_slack(VertexId::new(0, 0), 1),
            Err(HeuristicError::UnreachableGoal { from: VertexId::new(0, 0), goal_agent: 1 })
        );
    }

    #[test]
    fn dependency_charge_closes_the_bound_gap() {
        let g = handoff(true);
        let lp = with_backward(&g);
        let dep = DependencyGraph::build(&g, &lp);
        let charges: Vec<_> = dep.weighted_edges().collect();
        assert_eq!(charges, vec![(0, 1, 1)]);
        // Reduced cost 8 plus the unavoidable unit charge meets the optimum.
        assert_eq!(lp.goal_sum(&g) + dep.greedy_cover_bound(), 9);
        assert_eq!(enumerate_optimal(&g).unwrap().min_cost, Some(9));
    }

    #[test]
    fn the_charge_is_tight_even_undelayed() {
        // With no delay the shared cell still costs one of the two agents a
        // unit wait, and the charge prices it exactly: 6 + 1 = 7 = optimum.
        let g = handoff(false);
        let lp = with_backward(&g);
        let sv = SlackView::new(&g, &lp);
        assert_eq!(sv.edge_slack(0), -1);
        assert_eq!(sv.reverse_edge_slack(0), -3);
        let dep = DependencyGraph::build(&g, &lp);
        assert_eq!(dep.weighted_edges().collect::<Vec<_>>(), vec![(0, 1, 1)]);
        assert_eq!(lp.goal_sum(&g) + dep.greedy_cover_bound(), 7);
        assert_eq!(enumerate_optimal(&g).unwrap().min_cost, Some(7));
    }

    #[test]
    fn no_charge_when_the_later_visitor_lags() {
        // Agent 1 reaches the shared cell four steps after agent 0 has left
        // it, so keeping the planned order is free and nothing binds.
        let a0 = crate::graph::AgentChain::unit(vec![0, 1, 2]);
        let a1 =
            crate::graph::AgentChain { locs: vec![3, 4, 1, 5, 6], costs: vec![5, 1, 1, 1] };
        let pair = crate::graph::Type2Pair {
            i_vertex: VertexId::new(1, 2),
            j_vertex: VertexId::new(0, 1),
            state: crate::graph::EdgeState::Switchable,
        };
        let g = Stpg::from_parts(vec![a0, a1], vec![pair]).unwrap();
        let lp = with_backward(&g);
        assert_eq!(SlackView::new(&g, &lp).edge_slack(0), 3);
        let dep = DependencyGraph::build(&g, &lp);
        assert!(dep.is_empty());
        assert_eq!(dep.greedy_cover_bound(), 0);
    }

    #[test]
    fn charges_vanish_once_settled() {
        let g = handoff(true).settle(&[0], SettleDirection::Reverse).unwrap();
        let lp = with_backward(&g);
        assert!(DependencyGraph::build(&g, &lp).is_empty());
        assert_eq!(lp.goal_sum(&g), 9);
    }

    #[test]
    fn greedy_bound_never_beats_exact_cover() {
        for g in [handoff(true), corridor(false), corridor(true)] {
            let lp = with_backward(&g);
            let dep = DependencyGraph::build(&g, &lp);
            let edges: Vec<(usize, usize, i64)> =
                dep.weighted_edges().map(|(m, n, w)| (m as usize, n as usize, w)).collect();
            let agents = g.agent_count();
            assert!(dep.greedy_cover_bound() <= exact_ewmvc(agents, &edges));
        }
    }

    #[test]
    fn greedy_bound_is_a_maximal_matching() {
        let dep = DependencyGraph {
            weights: BTreeMap::from([((0, 1), 2), ((1, 2), 2), ((0, 2), 2), ((3, 4), 5)]),
        };
        // Heaviest first: (3,4) then one triangle edge, ties broken by key.
        assert_eq!(dep.greedy_cover_bound(), 7);
        assert!(dep.greedy_cover_bound() <= exact_ewmvc(5, &[(0, 1, 2), (1, 2, 2), (0, 2, 2), (3, 4, 5)]));
    }
}
