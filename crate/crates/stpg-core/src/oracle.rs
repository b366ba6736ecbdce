//! Brute-force reference implementations.
//!
//! Everything here trades speed for obviousness: longest paths by blind
//! relaxation, optimal settlement by enumerating every combination, group
//! checks by enumerating every settlement of a subgraph with an independent
//! cycle test, and an exact exponential solver for the covering problem the
//! search heuristic lower-bounds. The fast implementations are tested
//! against these, never the other way around.

use crate::graph::{SettleDirection, Stpg};
use crate::grouping::{GroupSet, GroupingMode, OrderedPairSubgraph};
use crate::longest_paths::flpl;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Enumeration beyond this many binary choices is off the table.
const MAX_ENUM: usize = 20;
/// Per-subgraph settlement enumeration cap for group verification.
const MAX_GROUP_ENUM: usize = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{0} binary choices is too many to enumerate")]
    TooLarge(usize),
    #[error("relaxation failed to settle; the graph has a cycle")]
    NonTermination,
    #[error("group {group} mixes directions in an executable settlement (mask {mask:#b})")]
    UnsoundGroup { group: usize, mask: u32 },
    #[error("groups {a} and {b} agree in every executable settlement; they should be one group")]
    MissedMerge { a: usize, b: usize },
}

/// Longest paths by relaxation to fixpoint.
pub struct NaiveLp {
    pub forward: Vec<i64>,
    backward: Vec<i64>,
    agents: usize,
}

impl NaiveLp {
    pub fn backward_of(&self, flat: usize, goal_agent: u32) -> Option<i64> {
        match self.backward[flat * self.agents + goal_agent as usize] {
            -1 => None,
            d => Some(d),
        }
    }
}

/// Relaxes every edge until nothing changes. A pass count beyond the vertex
/// count means the graph has a cycle.
pub fn naive_longest_paths(stpg: &Stpg) -> Result<NaiveLp, OracleError> {
    let view = stpg.reduced_view();
    let n = stpg.vertex_count();
    let agents = stpg.agent_count();
    let mut edges: Vec<(usize, usize, u32)> = Vec::new();
    for v in 0..n {
        for (u, c) in view.succs(v) {
            edges.push((v, u, c));
        }
    }

    // Initializing every vertex to 0 is safe: costs are positive, so any
    // longest path extends backward to a source without losing weight.
    let mut forward = vec![0i64; n];
    let mut settled = false;
    for _ in 0..=n {
        let mut changed = false;
        for &(u, v, c) in &edges {
            if forward[u] + c as i64 > forward[v] {
                forward[v] = forward[u] + c as i64;
                changed = true;
            }
        }
        if !changed {
            settled = true;
            break;
        }
    }
    if !settled {
        return Err(OracleError::NonTermination);
    }

    let mut backward = vec![-1i64; n * agents];
    for a in 0..agents as u32 {
        backward[stpg.flat(stpg.goal(a)) * agents + a as usize] = 0;
    }
    for _ in 0..=n {
        let mut changed = false;
        for &(u, v, c) in &edges {
            for g in 0..agents {
                let from_v = backward[v * agents + g];
                if from_v != -1 && from_v + c as i64 > backward[u * agents + g] {
                    backward[u * agents + g] = from_v + c as i64;
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(NaiveLp { forward, backward, agents });
        }
    }
    Err(OracleError::NonTermination)
}

/// Result of enumerating every settlement of the switchable pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Enumeration {
    /// Cheapest executable settlement, if any settlement is executable.
    pub min_cost: Option<i64>,
    pub acyclic_count: usize,
}

/// Tries all `2^k` ways to settle the switchable pairs and reports the
/// cheapest executable one. Costs come from forward longest paths, which
/// are verified separately against [`naive_longest_paths`].
pub fn enumerate_optimal(stpg: &Stpg) -> Result<Enumeration, OracleError> {
    let switchable: Vec<usize> = stpg.switchable_pairs().collect();
    let k = switchable.len();
    if k > MAX_ENUM {
        return Err(OracleError::TooLarge(k));
    }
    let mut min_cost = None;
    let mut acyclic_count = 0;
    for mask in 0u32..1 << k {
        let mut fix = Vec::new();
        let mut rev = Vec::new();
        for (bit, &p) in switchable.iter().enumerate() {
            if mask >> bit & 1 == 0 {
                fix.push(p);
            } else {
                rev.push(p);
            }
        }
        let settled = stpg
            .settle(&fix, SettleDirection::Fix)
            .and_then(|g| g.settle(&rev, SettleDirection::Reverse))
            .expect("settling listed switchable pairs cannot fail");
        if let Ok(lp) = flpl(&settled) {
            acyclic_count += 1;
            let cost = lp.goal_sum(&settled);
            min_cost = Some(min_cost.map_or(cost, |c: i64| c.min(cost)));
        }
    }
    Ok(Enumeration { min_cost, acyclic_count })
}

/// Iterative DFS cycle detection over a plain adjacency list.
fn has_cycle(adj: &[Vec<usize>]) -> bool {
    const WHITE: u8 = 0;
    const GRAY: u8 = 1;
    const BLACK: u8 = 2;
    let mut color = vec![WHITE; adj.len()];
    for root in 0..adj.len() {
        if color[root] != WHITE {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        color[root] = GRAY;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < adj[v].len() {
                let u = adj[v][*next];
                *next += 1;
                match color[u] {
                    GRAY => return true,
                    WHITE => {
                        color[u] = GRAY;
                        stack.push((u, 0));
                    }
                    _ => {}
                }
            } else {
                color[v] = BLACK;
                stack.pop();
            }
        }
    }
    false
}

/// Checks a grouping against the ground truth, one agent-pair subgraph at a
/// time, by enumerating every settlement of its edges over the two chains
/// (extended by one phantom step so that every pair is flippable) and
/// testing executability with an independent cycle check.
///
/// Soundness (any mode): in every executable settlement, each group's
/// members all point the same way. Maximality (exact mode only): any two
/// distinct groups disagree in at least one executable settlement —
/// otherwise they were wrongly kept apart.
pub fn verify_groups(stpg: &Stpg, groups: &GroupSet) -> Result<(), OracleError> {
    for sub in OrderedPairSubgraph::collect(stpg) {
        let k = sub.edges.len();
        if k > MAX_GROUP_ENUM {
            return Err(OracleError::TooLarge(k));
        }
        // Chain vertices 0..=z+1; ids on the later chain are offset.
        let nf = stpg.z(sub.from_agent) as usize + 2;
        let nt = stpg.z(sub.to_agent) as usize + 2;
        let mut local_groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (bit, e) in sub.edges.iter().enumerate() {
            local_groups.entry(groups.pair_to_group[e.pair]).or_default().push(bit);
        }
        let mut disagreed: BTreeSet<(usize, usize)> = BTreeSet::new();
        for mask in 0u32..1 << k {
            let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nf + nt];
            for v in 0..nf - 1 {
                adj[v].push(v + 1);
            }
            for v in 0..nt - 1 {
                adj[nf + v].push(nf + v + 1);
            }
            for (bit, e) in sub.edges.iter().enumerate() {
                let p = stpg.pair(e.pair);
                if mask >> bit & 1 == 0 {
                    adj[p.j_vertex.step as usize + 1].push(nf + p.i_vertex.step as usize);
                } else {
                    adj[nf + p.i_vertex.step as usize + 1].push(p.j_vertex.step as usize);
                }
            }
            if has_cycle(&adj) {
                continue;
            }
            for (&gid, bits) in &local_groups {
                let first = mask >> bits[0] & 1;
                if bits.iter().any(|&b| mask >> b & 1 != first) {
                    return Err(OracleError::UnsoundGroup { group: gid, mask });
                }
            }
            let gids: Vec<usize> = local_groups.keys().copied().collect();
            for (ai, &ga) in gids.iter().enumerate() {
                for &gb in &gids[ai + 1..] {
                    if mask >> local_groups[&ga][0] & 1 != mask >> local_groups[&gb][0] & 1 {
                        disagreed.insert((ga, gb));
                    }
                }
            }
        }
        if groups.mode == GroupingMode::Full {
            let gids: Vec<usize> = local_groups.keys().copied().collect();
            for (ai, &ga) in gids.iter().enumerate() {
                for &gb in &gids[ai + 1..] {
                    if !disagreed.contains(&(ga, gb)) {
                        return Err(OracleError::MissedMerge { a: ga, b: gb });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Exact minimum of `sum(x)` subject to `x[u] + x[v] >= w` for every edge,
/// `x >= 0` integer: the covering problem whose greedy lower bound the
/// search heuristic uses. Depth-first over all ways to split each uncovered
/// edge's residual between its endpoints, pruned by a disjoint-edge bound.
pub fn exact_ewmvc(n: usize, edges: &[(usize, usize, i64)]) -> i64 {
    assert!(n <= 12, "exact covering solver is exponential; keep instances small");
    let edges: Vec<(usize, usize, i64)> =
        edges.iter().copied().filter(|&(u, v, w)| w > 0 && u != v).collect();
    debug_assert!(edges.iter().all(|&(u, v, _)| u < n && v < n));

    fn disjoint_bound(edges: &[(usize, usize, i64)], x: &[i64]) -> i64 {
        let mut used = vec![false; x.len()];
        let mut bound = 0;
        for &(u, v, w) in edges {
            let r = w - x[u] - x[v];
            if r > 0 && !used[u] && !used[v] {
                used[u] = true;
                used[v] = true;
                bound += r;
            }
        }
        bound
    }

    fn dfs(edges: &[(usize, usize, i64)], x: &mut [i64], sum: i64, best: &mut i64) {
        if sum + disjoint_bound(edges, x) >= *best {
            return;
        }
        let Some(&(u, v, w)) = edges.iter().find(|&&(u, v, w)| x[u] + x[v] < w) else {
            *best = sum;
            return;
        };
        let r = w - x[u] - x[v];
        for a in 0..=r {
            x[u] += a;
            x[v] += r - a;
            dfs(edges, x, sum + r, best);
            x[u] -= a;
            x[v] -= r - a;
        }
    }

    let mut x = vec![0i64; n];
    let mut best = i64::MAX;
    dfs(&edges, &mut x, 0, &mut best);
    best
}
