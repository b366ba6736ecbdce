//! Longest paths over the reduced graph.
//!
//! Forward lengths are earliest arrival times: `L(v)` is the weight of the
//! longest path from any source to `v`, with chain starts pinned to 0.
//! Backward lengths `L(v, g)` measure the longest path from `v` to agent
//! `g`'s goal and use a reachability sentinel rather than mixing infinities
//! into arithmetic.
//!
//! Both families come in two flavors: a from-scratch sweep in topological
//! order, and an incremental update under edge insertion that processes a
//! worklist keyed by the pre-insertion lengths. The incremental results are
//! bit-identical to recomputation: a vertex whose inputs change after it was
//! already recomputed is simply pushed again, so batches where one new edge
//! feeds another are handled exactly.

use crate::graph::{Stpg, VertexId};
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use thiserror::Error;

const UNREACHABLE: i64 = -1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LpError {
    #[error("cycle encountered in reduced graph")]
    CycleEncountered,
}

/// Longest-path lengths for one reduced graph.
///
/// `topo` is a vertex ordering consistent with the graph at the last full
/// computation; incremental updates keep the lengths exact without
/// maintaining it.
#[derive(Debug, Clone)]
pub struct LongestPathState {
    forward: Vec<i64>,
    /// Row-major `vertex * agents + goal_agent`; `None` until `blpl` runs.
    backward: Option<Vec<i64>>,
    topo: Vec<u32>,
    agents: usize,
}

impl LongestPathState {
    pub fn forward_of(&self, flat: usize) -> i64 {
        self.forward[flat]
    }

    pub fn forward_at(&self, stpg: &Stpg, v: VertexId) -> i64 {
        self.forward[stpg.flat(v)]
    }

    /// Longest path from `flat` to agent `goal_agent`'s goal, or `None` if
    /// the goal is unreachable from there. Panics if `blpl` never ran.
    pub fn backward_of(&self, flat: usize, goal_agent: u32) -> Option<i64> {
        let m = self.backward.as_ref().expect("backward lengths not computed");
        match m[flat * self.agents + goal_agent as usize] {
            UNREACHABLE => None,
            d => Some(d),
        }
    }

    pub fn has_backward(&self) -> bool {
        self.backward.is_some()
    }

    /// Sum of goal arrival times: the execution cost of the reduced graph.
    pub fn goal_sum(&self, stpg: &Stpg) -> i64 {
        (0..stpg.agent_count() as u32).map(|a| self.forward[stpg.flat(stpg.goal(a))]).sum()
    }

    pub fn topo(&self) -> &[u32] {
        &self.topo
    }
}

/// Forward longest path lengths, from scratch.
///
/// Sweeps a topological order of the reduced graph; chain starts have no
/// incoming edges and get length 0. Fails with `CycleEncountered` when no
/// topological order exists.
pub fn flpl(stpg: &Stpg) -> Result<LongestPathState, LpError> {
    let view = stpg.reduced_view();
    debug_assert!(
        (0..stpg.agent_count() as u32).all(|a| view.in_degree(stpg.flat(stpg.start(a))) == 0),
        "chain starts must be sources"
    );
    let topo = view.topo_order().map_err(|_| LpError::CycleEncountered)?;
    let mut forward = vec![0i64; stpg.vertex_count()];
    for &v in &topo {
        let mut best = 0i64;
        for (u, c) in view.preds(v as usize) {
            best = best.max(forward[u] + c as i64);
        }
        forward[v as usize] = best;
    }
    Ok(LongestPathState { forward, backward: None, topo, agents: stpg.agent_count() })
}

/// Backward longest path lengths to every goal, from scratch.
///
/// Requires a `state` produced by `flpl` on the same graph (its topological
/// order is reused). Unreachable entries keep the sentinel and are reported
/// as `None` by the accessors.
pub fn blpl(stpg: &Stpg, state: &mut LongestPathState) {
    let view = stpg.reduced_view();
    let n = stpg.vertex_count();
    let agents = stpg.agent_count();
    debug_assert_eq!(state.topo.len(), n, "topological order is stale");
    let mut m = vec![UNREACHABLE; n * agents];
    for a in 0..agents as u32 {
        m[stpg.flat(stpg.goal(a)) * agents + a as usize] = 0;
    }
    for &v in state.topo.iter().rev() {
        let v = v as usize;
        for (u, c) in view.succs(v) {
            for g in 0..agents {
                let cand = m[u * agents + g];
                if cand != UNREACHABLE && cand + c as i64 > m[v * agents + g] {
                    m[v * agents + g] = cand + c as i64;
                }
            }
        }
    }
    state.backward = Some(m);
}

/// Sum of every edge cost in the reduced graph: no acyclic length can exceed
/// it, so any propagation past it proves a cycle.
fn length_bound(stpg: &Stpg) -> i64 {
    let type1: i64 = (0..stpg.agent_count() as u32)
        .map(|a| stpg.chain(a).costs.iter().map(|&c| c as i64).sum::<i64>())
        .sum();
    type1 + (stpg.pair_count() - stpg.switchable_count()) as i64
}

/// Updates forward lengths after inserting `new_edges` into the graph.
///
/// `state` must hold the lengths of the graph without those edges; `stpg`
/// is the graph with them. Recomputation pops vertices in ascending order of
/// their stale length (ties by vertex id) and pushes the successors of any
/// vertex whose length changed — including ones already recomputed, which is
/// what keeps multi-edge batches exact.
pub fn flpl_incremental(
    state: &mut LongestPathState,
    stpg: &Stpg,
    new_edges: &[(u32, u32)],
) -> Result<(), LpError> {
    let view = stpg.reduced_view();
    let bound = length_bound(stpg);
    let mut heap: BinaryHeap<Reverse<(i64, u32)>> = BinaryHeap::new();
    let mut in_heap = vec![false; stpg.vertex_count()];
    for &(_, tgt) in new_edges {
        if !in_heap[tgt as usize] {
            in_heap[tgt as usize] = true;
            heap.push(Reverse((state.forward[tgt as usize], tgt)));
        }
    }
    while let Some(Reverse((_, v))) = heap.pop() {
        let v = v as usize;
        in_heap[v] = false;
        let mut best = 0i64;
        for (u, c) in view.preds(v) {
            best = best.max(state.forward[u] + c as i64);
        }
        if best > bound {
            return Err(LpError::CycleEncountered);
        }
        if best != state.forward[v] {
            state.forward[v] = best;
            for (u, _) in view.succs(v) {
                if !in_heap[u] {
                    in_heap[u] = true;
                    heap.push(Reverse((state.forward[u], u as u32)));
                }
            }
        }
    }
    Ok(())
}

/// Updates backward lengths after inserting `new_edges` into the graph.
///
/// Mirror image of [`flpl_incremental`]: seeds are the new edges' sources,
/// the worklist pops in descending stale forward length (a reverse
/// topological order of the old graph), and changes propagate to
/// predecessors. Safe to run before or after the forward update; the keys
/// only steer processing order.
pub fn blpl_incremental(
    state: &mut LongestPathState,
    stpg: &Stpg,
    new_edges: &[(u32, u32)],
) -> Result<(), LpError> {
    let agents = stpg.agent_count();
    let m_len = stpg.vertex_count() * agents;
    let bound = length_bound(stpg);
    debug_assert!(state.backward.as_ref().map(|m| m.len()) == Some(m_len));
    let view = stpg.reduced_view();
    let goals: Vec<usize> = (0..agents as u32).map(|a| stpg.flat(stpg.goal(a))).collect();
    let mut heap: BinaryHeap<(i64, Reverse<u32>)> = BinaryHeap::new();
    let mut in_heap = vec![false; stpg.vertex_count()];
    for &(src, _) in new_edges {
        if !in_heap[src as usize] {
            in_heap[src as usize] = true;
            heap.push((state.forward[src as usize], Reverse(src)));
        }
    }
    let m = state.backward.as_mut().unwrap();
    while let Some((_, Reverse(v))) = heap.pop() {
        let v = v as usize;
        in_heap[v] = false;
        let mut changed = false;
        for g in 0..agents {
            let mut best = if goals[g] == v { 0 } else { UNREACHABLE };
            for (u, c) in view.succs(v) {
                let cand = m[u * agents + g];
                if cand != UNREACHABLE {
                    best = best.max(cand + c as i64);
                }
            }
            if best > bound {
                return Err(LpError::CycleEncountered);
            }
            if best != m[v * agents + g] {
                m[v * agents + g] = best;
                changed = true;
            }
        }
        if changed {
            for (u, _) in view.preds(v) {
                if !in_heap[u] {
                    in_heap[u] = true;
                    heap.push((state.forward[u], Reverse(u as u32)));
                }
            }
        }
    }
    Ok(())
}
