//! The switchable temporal plan graph (STPG).
//!
//! Vertices are the merged location visits of each agent, laid out as one
//! chain per agent. Type-1 edges connect consecutive vertices of a chain and
//! carry an integer traversal cost (cost > 1 encodes a delay). Type-2 pairs
//! order two agents through a shared location; each pair is either still
//! switchable or settled in one of its two directions:
//!
//! - fixed:    `(j_vertex.step + 1 on agent j)  ->  i_vertex`
//! - reversed: `(i_vertex.step + 1 on agent i)  ->  j_vertex`
//!
//! where agent `j` visited the location first in the original plan. The
//! *reduced* graph (Type-1 edges plus settled Type-2 edges only) is what all
//! longest-path and cycle computations run on; switchable pairs contribute
//! nothing until they are settled.

use std::sync::Arc;
use thiserror::Error;

/// A vertex, addressed by agent index and position in that agent's chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId {
    pub agent: u32,
    pub step: u32,
}

impl VertexId {
    pub fn new(agent: u32, step: u32) -> Self {
        VertexId { agent, step }
    }
}

/// Settlement status of a Type-2 pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeState {
    /// Not yet decided; the pair contributes no edge to the reduced graph.
    Switchable,
    /// Settled in the original plan's visiting order.
    Fixed,
    /// Settled in the opposite order.
    Reversed,
}

/// Direction in which a switchable pair (or a whole group) gets settled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SettleDirection {
    Fix,
    Reverse,
}

/// One inter-agent ordering constraint through a shared location.
///
/// `j_vertex` is the visit of the agent that held the location first in the
/// original plan; `i_vertex` is the later visit. The fixed edge points at
/// `i_vertex`, the reversed edge points at `j_vertex`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Type2Pair {
    pub i_vertex: VertexId,
    pub j_vertex: VertexId,
    pub state: EdgeState,
}

/// One agent's chain: merged locations plus the Type-1 edge costs between
/// consecutive ones (`costs.len() == locs.len() - 1`, all costs >= 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentChain {
    pub locs: Vec<u32>,
    pub costs: Vec<u32>,
}

impl AgentChain {
    pub fn unit(locs: Vec<u32>) -> Self {
        let costs = vec![1; locs.len().saturating_sub(1)];
        AgentChain { locs, costs }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("malformed graph: {0}")]
    Malformed(String),
    #[error("pair {0} is not switchable")]
    SettleNonSwitchable(usize),
    #[error("execution deadlocked at timestep {0}: the graph has a cycle")]
    DeadlockDetected(i64),
}

/// Immutable part of an STPG: chains, costs and pair endpoints. Shared by all
/// STPGs derived from the same instance, so settling copies only the
/// per-state data.
#[derive(Debug)]
struct Shape {
    chains: Vec<AgentChain>,
    /// Flat-id base per agent, plus the total vertex count as last entry.
    offsets: Vec<u32>,
    /// (i_vertex, j_vertex) per pair, in construction order.
    endpoints: Vec<(VertexId, VertexId)>,
}

/// A temporal plan graph with switchable ordering decisions.
///
/// Cloning and settling are cheap relative to the instance: the shape is
/// shared, only pair states and the settled-edge adjacency are rebuilt.
/// Values are self-contained and safe to move across threads.
#[derive(Debug, Clone)]
pub struct Stpg {
    shape: Arc<Shape>,
    states: Vec<EdgeState>,
    switchable: usize,
    // CSR adjacency over settled Type-2 edges (flat vertex ids, cost 1).
    in_heads: Vec<u32>,
    in_list: Vec<u32>,
    out_heads: Vec<u32>,
    out_list: Vec<u32>,
}

impl Stpg {
    /// Builds an STPG from explicit parts, validating index structure.
    ///
    /// Structural checks only: chains non-empty, costs >= 1 and aligned,
    /// pair endpoints in range and on distinct agents, the fixed edge always
    /// constructible, and the reversed edge constructible unless the pair is
    /// permanently `Fixed`. Location agreement between pair endpoints is the
    /// caller's responsibility (plan-derived graphs uphold it; synthetic
    /// graphs may use pairs as pure precedence constraints).
    pub fn from_parts(chains: Vec<AgentChain>, pairs: Vec<Type2Pair>) -> Result<Stpg, GraphError> {
        if chains.is_empty() {
            return Err(GraphError::Malformed("no agents".into()));
        }
        let mut offsets = Vec::with_capacity(chains.len() + 1);
        let mut total = 0u32;
        for (a, c) in chains.iter().enumerate() {
            if c.locs.is_empty() {
                return Err(GraphError::Malformed(format!("agent {a} has no locations")));
            }
            if c.costs.len() + 1 != c.locs.len() {
                return Err(GraphError::Malformed(format!(
                    "agent {a}: {} costs for {} locations",
                    c.costs.len(),
                    c.locs.len()
                )));
            }
            if c.costs.iter().any(|&w| w == 0) {
                return Err(GraphError::Malformed(format!("agent {a} has a zero-cost edge")));
            }
            offsets.push(total);
            total = total
                .checked_add(c.locs.len() as u32)
                .ok_or_else(|| GraphError::Malformed("vertex count overflow".into()))?;
        }
        offsets.push(total);

        let z = |agent: u32| chains[agent as usize].locs.len() as u32 - 1;
        let mut endpoints = Vec::with_capacity(pairs.len());
        let mut states = Vec::with_capacity(pairs.len());
        for (k, p) in pairs.iter().enumerate() {
            let check = |v: VertexId| -> Result<(), GraphError> {
                if v.agent as usize >= chains.len() || v.step > z(v.agent) {
                    return Err(GraphError::Malformed(format!(
                        "pair {k}: vertex ({}, {}) out of range",
                        v.agent, v.step
                    )));
                }
                Ok(())
            };
            check(p.i_vertex)?;
            check(p.j_vertex)?;
            if p.i_vertex.agent == p.j_vertex.agent {
                return Err(GraphError::Malformed(format!("pair {k}: both endpoints on one agent")));
            }
            // Fixed edge source is the successor of j_vertex; it must exist.
            if p.j_vertex.step + 1 > z(p.j_vertex.agent) {
                return Err(GraphError::Malformed(format!(
                    "pair {k}: agent {} never leaves step {}",
                    p.j_vertex.agent, p.j_vertex.step
                )));
            }
            // The reversed edge needs a successor of i_vertex unless the pair
            // can never be reversed.
            if p.state != EdgeState::Fixed && p.i_vertex.step + 1 > z(p.i_vertex.agent) {
                return Err(GraphError::Malformed(format!(
                    "pair {k}: reversal impossible, vertex ({}, {}) is a goal",
                    p.i_vertex.agent, p.i_vertex.step
                )));
            }
            endpoints.push((p.i_vertex, p.j_vertex));
            states.push(p.state);
        }

        let switchable = states.iter().filter(|s| **s == EdgeState::Switchable).count();
        let shape = Arc::new(Shape { chains, offsets, endpoints });
        let mut g = Stpg {
            shape,
            states,
            switchable,
            in_heads: Vec::new(),
            in_list: Vec::new(),
            out_heads: Vec::new(),
            out_list: Vec::new(),
        };
        g.rebuild_adjacency();
        Ok(g)
    }

    pub fn agent_count(&self) -> usize {
        self.shape.chains.len()
    }

    pub fn vertex_count(&self) -> usize {
        *self.shape.offsets.last().unwrap() as usize
    }

    /// Index of the last vertex in an agent's chain (its goal step).
    pub fn z(&self, agent: u32) -> u32 {
        self.shape.chains[agent as usize].locs.len() as u32 - 1
    }

    pub fn chain(&self, agent: u32) -> &AgentChain {
        &self.shape.chains[agent as usize]
    }

    pub fn start(&self, agent: u32) -> VertexId {
        VertexId::new(agent, 0)
    }

    pub fn goal(&self, agent: u32) -> VertexId {
        VertexId::new(agent, self.z(agent))
    }

    pub fn loc(&self, v: VertexId) -> u32 {
        self.shape.chains[v.agent as usize].locs[v.step as usize]
    }

    /// Cost of the Type-1 edge leaving `(agent, step)`.
    pub fn type1_cost(&self, agent: u32, step: u32) -> u32 {
        self.shape.chains[agent as usize].costs[step as usize]
    }

    pub fn flat(&self, v: VertexId) -> usize {
        (self.shape.offsets[v.agent as usize] + v.step) as usize
    }

    pub fn vertex(&self, flat: usize) -> VertexId {
        debug_assert!(flat < self.vertex_count());
        let flat = flat as u32;
        // offsets is strictly increasing (no empty chains).
        let agent = match self.shape.offsets.binary_search(&flat) {
            Ok(idx) => idx,
            Err(idx) => idx - 1,
        };
        VertexId::new(agent as u32, flat - self.shape.offsets[agent])
    }

    pub fn pair_count(&self) -> usize {
        self.states.len()
    }

    pub fn pair(&self, k: usize) -> Type2Pair {
        let (i_vertex, j_vertex) = self.shape.endpoints[k];
        Type2Pair { i_vertex, j_vertex, state: self.states[k] }
    }

    pub fn pairs(&self) -> impl Iterator<Item = Type2Pair> + '_ {
        (0..self.pair_count()).map(|k| self.pair(k))
    }

    pub fn pair_state(&self, k: usize) -> EdgeState {
        self.states[k]
    }

    pub fn switchable_count(&self) -> usize {
        self.switchable
    }

    pub fn switchable_pairs(&self) -> impl Iterator<Item = usize> + '_ {
        self.states
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == EdgeState::Switchable)
            .map(|(k, _)| k)
    }

    /// Endpoints of the directed edge a pair contributes when settled in
    /// `dir`, as (source, target).
    pub fn settled_endpoints(&self, k: usize, dir: SettleDirection) -> (VertexId, VertexId) {
        let (iv, jv) = self.shape.endpoints[k];
        match dir {
            SettleDirection::Fix => (VertexId::new(jv.agent, jv.step + 1), iv),
            SettleDirection::Reverse => (VertexId::new(iv.agent, iv.step + 1), jv),
        }
    }

    /// Settles the given switchable pairs in one direction, returning the new
    /// graph. The input is not mutated. When settling a group, callers pass
    /// edges of a single ordered agent pair; this is not enforced here.
    pub fn settle(&self, edges: &[usize], dir: SettleDirection) -> Result<Stpg, GraphError> {
        for &k in edges {
            if k >= self.states.len() {
                return Err(GraphError::Malformed(format!("pair {k} out of range")));
            }
            if self.states[k] != EdgeState::Switchable {
                return Err(GraphError::SettleNonSwitchable(k));
            }
        }
        let mut out = self.clone();
        for &k in edges {
            out.states[k] = match dir {
                SettleDirection::Fix => EdgeState::Fixed,
                SettleDirection::Reverse => EdgeState::Reversed,
            };
        }
        out.switchable -= edges.len();
        out.rebuild_adjacency();
        Ok(out)
    }

    /// Settles every remaining switchable pair in its original direction.
    ///
    /// Callers invoke this only when every switchable pair has non-negative
    /// slack, in which case the added edges change no arrival time. That
    /// precondition is the caller's (checked by `search` in debug builds);
    /// the graph operation itself is total.
    pub fn fix_all(&self) -> Tpg {
        let pending: Vec<usize> = self.switchable_pairs().collect();
        let settled = self.settle(&pending, SettleDirection::Fix).expect("pairs were switchable");
        Tpg { stpg: settled }
    }

    pub fn reduced_view(&self) -> ReducedView<'_> {
        ReducedView { stpg: self }
    }

    /// The directed edges (source, target) the given pairs would contribute
    /// if settled in `dir`, as flat ids. Used to seed incremental updates.
    pub fn edges_for(&self, pairs: &[usize], dir: SettleDirection) -> Vec<(u32, u32)> {
        pairs
            .iter()
            .map(|&k| {
                let (s, t) = self.settled_endpoints(k, dir);
                (self.flat(s) as u32, self.flat(t) as u32)
            })
            .collect()
    }

    fn rebuild_adjacency(&mut self) {
        let n = self.vertex_count();
        let mut edges: Vec<(u32, u32)> = Vec::new();
        for (k, s) in self.states.iter().enumerate() {
            let dir = match s {
                EdgeState::Fixed => SettleDirection::Fix,
                EdgeState::Reversed => SettleDirection::Reverse,
                EdgeState::Switchable => continue,
            };
            let (src, tgt) = self.settled_endpoints(k, dir);
            edges.push((self.flat(src) as u32, self.flat(tgt) as u32));
        }
        // Counting sort into CSR, by target for in-lists and source for
        // out-lists; within a bucket, construction order keeps it stable.
        self.in_heads = vec![0; n + 1];
        self.out_heads = vec![0; n + 1];
        for &(s, t) in &edges {
            self.in_heads[t as usize + 1] += 1;
            self.out_heads[s as usize + 1] += 1;
        }
        for v in 0..n {
            self.in_heads[v + 1] += self.in_heads[v];
            self.out_heads[v + 1] += self.out_heads[v];
        }
        self.in_list = vec![0; edges.len()];
        self.out_list = vec![0; edges.len()];
        let mut in_fill = self.in_heads.clone();
        let mut out_fill = self.out_heads.clone();
        for &(s, t) in &edges {
            self.in_list[in_fill[t as usize] as usize] = s;
            in_fill[t as usize] += 1;
            self.out_list[out_fill[s as usize] as usize] = t;
            out_fill[s as usize] += 1;
        }
    }
}

/// Read-only view of the reduced graph: Type-1 edges plus settled Type-2
/// edges. Switchable pairs are invisible here.
#[derive(Clone, Copy)]
pub struct ReducedView<'a> {
    stpg: &'a Stpg,
}

impl<'a> ReducedView<'a> {
    pub fn stpg(&self) -> &'a Stpg {
        self.stpg
    }

    pub fn vertex_count(&self) -> usize {
        self.stpg.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        let type1: usize = self.stpg.shape.chains.iter().map(|c| c.costs.len()).sum();
        type1 + self.stpg.in_list.len()
    }

    /// Incoming edges of a flat vertex as (source, cost).
    pub fn preds(&self, flat: usize) -> impl Iterator<Item = (usize, u32)> + 'a {
        let stpg = self.stpg;
        let v = stpg.vertex(flat);
        let type1 = if v.step > 0 {
            Some((flat - 1, stpg.type1_cost(v.agent, v.step - 1)))
        } else {
            None
        };
        let lo = stpg.in_heads[flat] as usize;
        let hi = stpg.in_heads[flat + 1] as usize;
        type1
            .into_iter()
            .chain(stpg.in_list[lo..hi].iter().map(|&s| (s as usize, 1)))
    }

    /// Outgoing edges of a flat vertex as (target, cost).
    pub fn succs(&self, flat: usize) -> impl Iterator<Item = (usize, u32)> + 'a {
        let stpg = self.stpg;
        let v = stpg.vertex(flat);
        let type1 = if v.step < stpg.z(v.agent) {
            Some((flat + 1, stpg.type1_cost(v.agent, v.step)))
        } else {
            None
        };
        let lo = stpg.out_heads[flat] as usize;
        let hi = stpg.out_heads[flat + 1] as usize;
        type1
            .into_iter()
            .chain(stpg.out_list[lo..hi].iter().map(|&t| (t as usize, 1)))
    }

    pub fn in_degree(&self, flat: usize) -> usize {
        let v = self.stpg.vertex(flat);
        let t1 = usize::from(v.step > 0);
        t1 + (self.stpg.in_heads[flat + 1] - self.stpg.in_heads[flat]) as usize
    }

    /// Topological order by Kahn's algorithm, processing ready vertices in
    /// ascending flat id for determinism. Fails if a cycle blocks the sort.
    pub fn topo_order(&self) -> Result<Vec<u32>, GraphError> {
        let n = self.vertex_count();
        let mut indeg: Vec<u32> = (0..n).map(|v| self.in_degree(v) as u32).collect();
        let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<u32>> = (0..n as u32)
            .filter(|&v| indeg[v as usize] == 0)
            .map(std::cmp::Reverse)
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(std::cmp::Reverse(v)) = ready.pop() {
            order.push(v);
            for (u, _) in self.succs(v as usize) {
                indeg[u] -= 1;
                if indeg[u] == 0 {
                    ready.push(std::cmp::Reverse(u as u32));
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err(GraphError::Malformed("graph has a cycle".into()))
        }
    }

    pub fn has_cycle(&self) -> bool {
        self.topo_order().is_err()
    }
}

/// A fully settled plan graph. Acyclicity is a property to check, not a
/// construction guarantee: `has_cycle` answers it, `simulate_execution`
/// reports deadlock on cyclic inputs.
#[derive(Debug, Clone)]
pub struct Tpg {
    stpg: Stpg,
}

impl Tpg {
    pub fn new(stpg: Stpg) -> Result<Tpg, GraphError> {
        if stpg.switchable_count() != 0 {
            return Err(GraphError::Malformed(format!(
                "{} pairs still switchable",
                stpg.switchable_count()
            )));
        }
        Ok(Tpg { stpg })
    }

    pub fn as_stpg(&self) -> &Stpg {
        &self.stpg
    }

    pub fn into_stpg(self) -> Stpg {
        self.stpg
    }

    pub fn has_cycle(&self) -> bool {
        self.stpg.reduced_view().has_cycle()
    }
}

/// Arrival times from a discrete-time execution of a settled plan graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionOutcome {
    /// Per-agent arrival time at its goal vertex.
    pub arrivals: Vec<i64>,
    /// Sum of all goal arrival times.
    pub total: i64,
}

/// Runs the plan graph forward in time.
///
/// Each timestep every agent advances along its chain when allowed: the
/// interior of a multi-cost edge (the delay portion) is traversed
/// unconditionally, while the final step into the next vertex waits until
/// every ordering predecessor of that vertex has been visited. Returns each
/// agent's goal arrival; if a whole timestep passes with nobody moving and
/// agents still unfinished, the orderings are circular and the execution is
/// deadlocked.
pub fn simulate_execution(tpg: &Tpg) -> Result<ExecutionOutcome, GraphError> {
    let g = tpg.as_stpg();
    let view = g.reduced_view();
    let n_agents = g.agent_count();
    let mut step = vec![0u32; n_agents]; // current vertex per agent
    let mut progress = vec![0u32; n_agents]; // timesteps spent on the outgoing edge
    let mut visited_at = vec![i64::MAX; g.vertex_count()]; // MAX = not yet visited
    let mut arrivals = vec![0i64; n_agents];
    for a in 0..n_agents {
        visited_at[g.flat(VertexId::new(a as u32, 0))] = 0;
    }

    let mut done = (0..n_agents).filter(|&a| g.z(a as u32) == 0).count();
    let mut t: i64 = 0;
    while done < n_agents {
        // Decide all moves against the state at time t, then apply them
        // simultaneously.
        let mut moves: Vec<(usize, bool)> = Vec::new(); // (agent, enters next vertex)
        for a in 0..n_agents {
            let agent = a as u32;
            if step[a] == g.z(agent) {
                continue;
            }
            let cost = g.type1_cost(agent, step[a]);
            if progress[a] + 1 < cost {
                moves.push((a, false));
                continue;
            }
            // An ordering predecessor visited at time u allows entry from
            // time u + 1 on; the move decided now completes at t + 1.
            let next = g.flat(VertexId::new(agent, step[a] + 1));
            let current = g.flat(VertexId::new(agent, step[a]));
            let gated = view.preds(next).any(|(u, _)| u != current && visited_at[u] > t);
            if !gated {
                moves.push((a, true));
            }
        }
        if moves.is_empty() {
            return Err(GraphError::DeadlockDetected(t));
        }
        t += 1;
        for (a, enters) in moves {
            if enters {
                step[a] += 1;
                progress[a] = 0;
                let v = VertexId::new(a as u32, step[a]);
                visited_at[g.flat(v)] = t;
                if step[a] == g.z(a as u32) {
                    arrivals[a] = t;
                    done += 1;
                }
            } else {
                progress[a] += 1;
            }
        }
    }
    let total = arrivals.iter().sum();
    Ok(ExecutionOutcome { arrivals, total })
}
