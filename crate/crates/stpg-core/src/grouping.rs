//! Edge grouping: partitioning ordering decisions that must move together.
//!
//! All ordering pairs between one ordered pair of agents live in a small
//! coordinate system: the pair whose earlier visitor leaves at step `m` of
//! its chain and whose later visitor enters at step `n` of its own chain is
//! the subgraph edge `(m, n)`. Flipping an edge mirrors it into the opposite
//! orientation's coordinates.
//!
//! Two edges belong in one group when flipping either forces flipping the
//! other, possibly through a chain of intermediate edges: a flipped edge
//! forms an unbreakable cycle with every still-unflipped edge it crosses, so
//! those must flip too. A search that settles whole groups at once prunes
//! every settlement that mixes directions inside a group, and loses nothing
//! by doing so because all such settlements deadlock.

use crate::graph::Stpg;
use std::collections::BTreeMap;

/// How ordering decisions are batched during search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupingMode {
    /// Every pair is its own group; branching settles one edge at a time.
    None,
    /// Chains of step-adjacent edges with a consistent drift are grouped.
    Simple,
    /// Exact grouping: the full flip-propagation closure in both directions.
    Full,
}

/// One subgraph edge: `(m, n)` plus the index of the pair it encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubgraphEdge {
    pub m: u32,
    pub n: u32,
    pub pair: usize,
}

/// All pairs between one ordered pair of agents, in subgraph coordinates.
///
/// `from_agent` is the earlier visitor of every shared location here;
/// `to_agent` the later one. Edges are sorted by `(m, n)`.
#[derive(Debug, Clone)]
pub struct OrderedPairSubgraph {
    pub from_agent: u32,
    pub to_agent: u32,
    pub edges: Vec<SubgraphEdge>,
}

/// A set of pairs settled as one unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeGroup {
    pub id: usize,
    pub from_agent: u32,
    pub to_agent: u32,
    /// Pair indices, ascending.
    pub members: Vec<usize>,
}

/// The grouping of every pair in a graph. Settled pairs participate too:
/// a group containing one is pinned to that direction before search.
#[derive(Debug, Clone)]
pub struct GroupSet {
    pub mode: GroupingMode,
    pub groups: Vec<EdgeGroup>,
    /// Maps pair index to group id.
    pub pair_to_group: Vec<usize>,
}

/// Mirrors an edge into the opposite orientation's coordinates.
///
/// Edge `(m, n)` stands for "earlier visitor's step `m` precedes later
/// visitor's step `n`". Flipped, the later visitor's step `n + 1` must
/// precede the earlier visitor's step `m - 1`, which is the edge
/// `(n + 1, m - 1)` of the mirrored subgraph. Applying this twice returns
/// the original edge.
pub fn reverse_coords(edge: (u32, u32)) -> (u32, u32) {
    debug_assert!(edge.0 >= 1, "subgraph edges start at m = 1");
    (edge.1 + 1, edge.0 - 1)
}

/// Indices of `edges` that form a two-edge cycle with `flipped`, an edge in
/// the mirrored orientation's coordinates.
///
/// A forward edge `(a, b)` and a mirrored edge `(c, d)` close a cycle
/// exactly when each one's target chain can walk forward to the other's
/// source: `d <= a` and `b <= c`.
pub fn find_cycle_edges(edges: &[(u32, u32)], flipped: (u32, u32)) -> Vec<usize> {
    let (c, d) = flipped;
    edges
        .iter()
        .enumerate()
        .filter(|&(_, &(a, b))| d <= a && b <= c)
        .map(|(i, _)| i)
        .collect()
}

/// Closure of forced flips: flipping `start` forms cycles with some
/// still-forward edges, which therefore flip too, and so on. Returns the
/// membership mask over `edges` (always including `start`).
pub fn propagate(edges: &[(u32, u32)], start: usize) -> Vec<bool> {
    let mut member = vec![false; edges.len()];
    member[start] = true;
    let mut queue = vec![start];
    while let Some(f) = queue.pop() {
        for g in find_cycle_edges(edges, reverse_coords(edges[f])) {
            if !member[g] {
                member[g] = true;
                queue.push(g);
            }
        }
    }
    member
}

/// Edges that must share `start`'s direction whichever way it goes: the
/// intersection of the flip closure with the un-flip closure (the latter
/// computed in the mirrored orientation, where roles swap).
pub fn find_groupable_edges(edges: &[(u32, u32)], start: usize) -> Vec<bool> {
    let forward = propagate(edges, start);
    let mirrored: Vec<(u32, u32)> = edges.iter().map(|&e| reverse_coords(e)).collect();
    let backward = propagate(&mirrored, start);
    forward.iter().zip(&backward).map(|(&a, &b)| a && b).collect()
}

/// Partitions subgraph edges into groups via the exact mutual-forcing
/// closure. Scans edges in `(m, n)` order and claims each unclaimed edge's
/// groupable set as one group.
fn full_groups(edges: &[(u32, u32)]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by_key(|&i| edges[i]);
    let mut grouped = vec![false; edges.len()];
    let mut groups = Vec::new();
    for &i in &order {
        if grouped[i] {
            continue;
        }
        let mask = find_groupable_edges(edges, i);
        let mut members: Vec<usize> =
            (0..edges.len()).filter(|&k| mask[k] && !grouped[k]).collect();
        debug_assert!(
            (0..edges.len()).all(|k| !mask[k] || !grouped[k]),
            "groupable sets must partition the edges"
        );
        members.sort_by_key(|&k| edges[k]);
        for &k in &members {
            grouped[k] = true;
        }
        groups.push(members);
    }
    groups
}

/// Cheaper approximate grouping: chains of edges at consecutive `m` whose
/// `n` drifts by a consistent +1 (running parallel) or -1 (crossing). Never
/// groups more than the exact closure does.
fn simple_groups(edges: &[(u32, u32)]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by_key(|&i| edges[i]);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut chain: Vec<usize> = Vec::new();
    let mut drift: Option<i64> = None;
    for &i in &order {
        let (m, n) = edges[i];
        if let Some(&prev) = chain.last() {
            let (pm, pn) = edges[prev];
            let step_ok = m == pm + 1;
            let d = n as i64 - pn as i64;
            let drift_ok = step_ok && d.abs() == 1 && drift.map_or(true, |x| x == d);
            if drift_ok {
                drift = Some(d);
                chain.push(i);
                continue;
            }
            groups.push(std::mem::take(&mut chain));
            drift = None;
        }
        chain.push(i);
    }
    if !chain.is_empty() {
        groups.push(chain);
    }
    groups
}

impl OrderedPairSubgraph {
    /// Collects every pair of `stpg` into per-orientation subgraphs, keyed
    /// and ordered by `(from_agent, to_agent)`.
    pub fn collect(stpg: &Stpg) -> Vec<OrderedPairSubgraph> {
        let mut buckets: BTreeMap<(u32, u32), Vec<SubgraphEdge>> = BTreeMap::new();
        for (idx, pair) in stpg.pairs().enumerate() {
            let key = (pair.j_vertex.agent, pair.i_vertex.agent);
            buckets.entry(key).or_default().push(SubgraphEdge {
                m: pair.j_vertex.step + 1,
                n: pair.i_vertex.step,
                pair: idx,
            });
        }
        buckets
            .into_iter()
            .map(|((from_agent, to_agent), mut edges)| {
                edges.sort_by_key(|e| (e.m, e.n));
                OrderedPairSubgraph { from_agent, to_agent, edges }
            })
            .collect()
    }

    fn coords(&self) -> Vec<(u32, u32)> {
        self.edges.iter().map(|e| (e.m, e.n)).collect()
    }
}

impl GroupSet {
    /// Groups every pair of `stpg` under `mode`. Group ids are dense and
    /// deterministic: subgraphs in agent-pair order, groups in first-member
    /// order within each.
    pub fn compute(stpg: &Stpg, mode: GroupingMode) -> GroupSet {
        let mut groups = Vec::new();
        let mut pair_to_group = vec![usize::MAX; stpg.pair_count()];
        for sub in OrderedPairSubgraph::collect(stpg) {
            let local: Vec<Vec<usize>> = match mode {
                GroupingMode::None => (0..sub.edges.len()).map(|i| vec![i]).collect(),
                GroupingMode::Simple => simple_groups(&sub.coords()),
                GroupingMode::Full => full_groups(&sub.coords()),
            };
            for members_local in local {
                let id = groups.len();
                let mut members: Vec<usize> =
                    members_local.iter().map(|&k| sub.edges[k].pair).collect();
                members.sort_unstable();
                for &p in &members {
                    pair_to_group[p] = id;
                }
                groups.push(EdgeGroup {
                    id,
                    from_agent: sub.from_agent,
                    to_agent: sub.to_agent,
                    members,
                });
            }
        }
        debug_assert!(pair_to_group.iter().all(|&g| g != usize::MAX));
        GroupSet { mode, groups, pair_to_group }
    }

    pub fn group_of(&self, pair: usize) -> &EdgeGroup {
        &self.groups[self.pair_to_group[pair]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{corridor, distant_cells};
    use crate::graph::{AgentChain, EdgeState, Type2Pair, VertexId};

    #[test]
    fn reverse_coords_is_an_involution() {
        for m in 1..10 {
            for n in 0..10 {
                assert_eq!(reverse_coords(reverse_coords((m, n))), (m, n));
            }
        }
        assert_eq!(reverse_coords((2, 1)), (2, 1)); // self-mirrored edge
        assert_eq!(reverse_coords((3, 3)), (4, 2));
    }

    #[test]
    fn cycle_test_needs_both_walks() {
        let edges = [(2u32, 1u32), (5, 1), (2, 6)];
        // flipped (c, d) cycles with (a, b) iff d <= a and b <= c
        assert_eq!(find_cycle_edges(&edges, (2, 1)), vec![0, 1]);
        assert_eq!(find_cycle_edges(&edges, (6, 3)), vec![1]);
        assert_eq!(find_cycle_edges(&edges, (7, 0)), vec![0, 1, 2]);
    }

    #[test]
    fn parallel_corridor_forms_one_group() {
        let g = corridor(false);
        let subs = OrderedPairSubgraph::collect(&g);
        assert_eq!(subs.len(), 1);
        assert_eq!(subs[0].coords(), vec![(2, 1), (3, 2), (4, 3)]);
        for mode in [GroupingMode::Simple, GroupingMode::Full] {
            let gs = GroupSet::compute(&g, mode);
            assert_eq!(gs.groups.len(), 1, "{mode:?}");
            assert_eq!(gs.groups[0].members, vec![0, 1, 2]);
        }
    }

    #[test]
    fn crossing_corridor_forms_one_group() {
        let g = corridor(true);
        let subs = OrderedPairSubgraph::collect(&g);
        assert_eq!(subs[0].coords(), vec![(2, 3), (3, 2), (4, 1)]);
        for mode in [GroupingMode::Simple, GroupingMode::Full] {
            let gs = GroupSet::compute(&g, mode);
            assert_eq!(gs.groups.len(), 1, "{mode:?}");
        }
    }

    #[test]
    fn inconsistent_drift_splits_simple_but_not_full() {
        // (2,1) then a drift flip: (3,3) -> (4,2). The exact closure still
        // chains all three through the middle edge.
        let edges = [(2u32, 1u32), (3, 3), (4, 2)];
        assert_eq!(full_groups(&edges), vec![vec![0, 1, 2]]);
        assert_eq!(simple_groups(&edges), vec![vec![0], vec![1, 2]]);
    }

    #[test]
    fn distant_edges_stay_apart() {
        let edges = [(2u32, 1u32), (4, 3)];
        assert_eq!(full_groups(&edges), vec![vec![0], vec![1]]);
        assert_eq!(simple_groups(&edges), vec![vec![0], vec![1]]);
        let gs = GroupSet::compute(&distant_cells(), GroupingMode::Full);
        assert_eq!(gs.groups.len(), 2);
    }

    #[test]
    fn orientations_are_grouped_separately() {
        // Two shared cells, visited in opposite orders: one pair per
        // orientation, so they can never share a group.
        let a0 = AgentChain::unit(vec![0, 1, 2, 3, 6]);
        let a1 = AgentChain::unit(vec![4, 3, 5, 1, 7]);
        let pairs = vec![
            Type2Pair {
                i_vertex: VertexId::new(1, 3), // cell 1: agent 0 first
                j_vertex: VertexId::new(0, 1),
                state: EdgeState::Switchable,
            },
            Type2Pair {
                i_vertex: VertexId::new(0, 3), // cell 3: agent 1 first
                j_vertex: VertexId::new(1, 1),
                state: EdgeState::Switchable,
            },
        ];
        let g = Stpg::from_parts(vec![a0, a1], pairs).unwrap();
        let gs = GroupSet::compute(&g, GroupingMode::Full);
        assert_eq!(gs.groups.len(), 2);
        assert_ne!(gs.pair_to_group[0], gs.pair_to_group[1]);
        assert_eq!((gs.group_of(0).from_agent, gs.group_of(0).to_agent), (0, 1));
        assert_eq!((gs.group_of(1).from_agent, gs.group_of(1).to_agent), (1, 0));
    }

    #[test]
    fn none_mode_keeps_singletons() {
        let g = corridor(false);
        let gs = GroupSet::compute(&g, GroupingMode::None);
        assert_eq!(gs.groups.len(), 3);
        assert!(gs.groups.iter().all(|gr| gr.members.len() == 1));
    }
}
