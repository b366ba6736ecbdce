//! From timed multi-agent plans to ordering graphs.
//!
//! A plan fixes where every agent stands at every timestep. Execution under
//! delays keeps only what matters from it: each agent's route (waits
//! collapsed away) and, for every location two agents both visit, who goes
//! first. The route chains plus those orderings form the graph the rest of
//! the crate works on; a delay scenario then stretches individual route
//! edges.

use crate::graph::{AgentChain, EdgeState, GraphError, Stpg, Tpg, Type2Pair, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// Interned locations plus one location sequence per agent per timestep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapfPlan {
    names: Vec<String>,
    paths: Vec<Vec<u32>>,
}

impl MapfPlan {
    /// Interns locations in order of first appearance.
    pub fn from_named_paths(paths: Vec<Vec<String>>) -> MapfPlan {
        let mut ids: HashMap<String, u32> = HashMap::new();
        let mut names = Vec::new();
        let paths = paths
            .into_iter()
            .map(|path| {
                path.into_iter()
                    .map(|name| {
                        *ids.entry(name.clone()).or_insert_with(|| {
                            names.push(name);
                            names.len() as u32 - 1
                        })
                    })
                    .collect()
            })
            .collect();
        MapfPlan { names, paths }
    }

    pub fn agent_count(&self) -> usize {
        self.paths.len()
    }

    pub fn path(&self, agent: u32) -> &[u32] {
        &self.paths[agent as usize]
    }

    pub fn location_name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn location_count(&self) -> usize {
        self.names.len()
    }

    /// Position at `t`, with the path's last location held forever.
    fn occupied(&self, agent: usize, t: usize) -> u32 {
        let p = &self.paths[agent];
        p[t.min(p.len() - 1)]
    }
}

/// Rectangular grid with blocked cells, for validating grid-based plans
/// whose locations are named `(row,col)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    pub width: usize,
    pub height: usize,
    passable: Vec<bool>,
}

impl GridMap {
    /// Builds from rows of passable flags. Rows must be equally long.
    pub fn from_rows(rows: Vec<Vec<bool>>) -> GridMap {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == width), "ragged map rows");
        GridMap { width, height, passable: rows.into_iter().flatten().collect() }
    }

    pub fn is_passable(&self, row: usize, col: usize) -> bool {
        row < self.height && col < self.width && self.passable[row * self.width + col]
    }
}

/// Parses a `(row,col)` location name.
pub fn parse_cell(name: &str) -> Option<(usize, usize)> {
    let inner = name.strip_prefix('(')?.strip_suffix(')')?;
    let (r, c) = inner.split_once(',')?;
    Some((r.trim().parse().ok()?, c.trim().parse().ok()?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConflictKind {
    /// Two agents in one location at one time.
    Vertex,
    /// An agent enters a location in the step its occupant leaves. Plans
    /// with such trains cannot be safely reordered, so they are rejected
    /// even though some planners emit them.
    Following,
}

impl fmt::Display for ConflictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConflictKind::Vertex => "vertex",
            ConflictKind::Following => "following",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictReport {
    pub kind: ConflictKind,
    pub time: u32,
    pub agents: (u32, u32),
    pub location: String,
}

impl fmt::Display for ConflictReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} conflict between agents {} and {} at t={} in {}",
            self.kind, self.agents.0, self.agents.1, self.time, self.location
        )
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("plan has no agents")]
    Empty,
    #[error("agent {0} has an empty path")]
    EmptyPath(u32),
    #[error("{0}")]
    Conflict(ConflictReport),
    #[error("location {0:?} is not a (row,col) grid cell")]
    BadCellName(String),
    #[error("location {0:?} is blocked or off the map")]
    OffMap(String),
    #[error("agent {agent} jumps from {from} to {to} at t={time}")]
    NotAdjacent { agent: u32, from: String, to: String, time: u32 },
    #[error("delay targets agent {agent} step {step}, outside the plan")]
    BadDelay { agent: u32, step: u32 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Checks a plan for vertex and following conflicts, with every agent
/// parked on its final location once its path ends. With a map, also checks
/// that locations are passable cells and that moves step to a neighbor.
pub fn validate_plan(plan: &MapfPlan, map: Option<&GridMap>) -> Result<(), PlanError> {
    if plan.agent_count() == 0 {
        return Err(PlanError::Empty);
    }
    for (a, path) in plan.paths.iter().enumerate() {
        if path.is_empty() {
            return Err(PlanError::EmptyPath(a as u32));
        }
    }
    if let Some(map) = map {
        let mut cells = vec![None; plan.location_count()];
        for (id, name) in plan.names.iter().enumerate() {
            let (r, c) = parse_cell(name).ok_or_else(|| PlanError::BadCellName(name.clone()))?;
            if !map.is_passable(r, c) {
                return Err(PlanError::OffMap(name.clone()));
            }
            cells[id] = Some((r, c));
        }
        for (a, path) in plan.paths.iter().enumerate() {
            for (t, w) in path.windows(2).enumerate() {
                let (r0, c0) = cells[w[0] as usize].unwrap();
                let (r1, c1) = cells[w[1] as usize].unwrap();
                if r0.abs_diff(r1) + c0.abs_diff(c1) > 1 {
                    return Err(PlanError::NotAdjacent {
                        agent: a as u32,
                        from: plan.names[w[0] as usize].clone(),
                        to: plan.names[w[1] as usize].clone(),
                        time: t as u32,
                    });
                }
            }
        }
    }
    let horizon = plan.paths.iter().map(|p| p.len()).max().unwrap();
    let agents = plan.agent_count();
    for t in 0..horizon {
        for a in 0..agents {
            for b in a + 1..agents {
                let here_a = plan.occupied(a, t);
                let here_b = plan.occupied(b, t);
                if here_a == here_b {
                    return Err(PlanError::Conflict(ConflictReport {
                        kind: ConflictKind::Vertex,
                        time: t as u32,
                        agents: (a as u32, b as u32),
                        location: plan.names[here_a as usize].clone(),
                    }));
                }
                if t + 1 < horizon {
                    for (x, y) in [(a, b), (b, a)] {
                        let next_x = plan.occupied(x, t + 1);
                        if next_x != plan.occupied(x, t) && next_x == plan.occupied(y, t) {
                            return Err(PlanError::Conflict(ConflictReport {
                                kind: ConflictKind::Following,
                                time: t as u32,
                                agents: (x.min(y) as u32, x.max(y) as u32),
                                location: plan.names[next_x as usize].clone(),
                            }));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Builds the ordering graph of a valid plan: per-agent route chains with
/// waits collapsed and unit move costs, plus one ordering pair per pair of
/// visits to a shared location, pointed the way the plan went.
pub fn build_tpg(plan: &MapfPlan) -> Result<Tpg, PlanError> {
    validate_plan(plan, None)?;

    // Collapse waits: one chain vertex per maximal run of equal locations,
    // remembering when each run began.
    let mut chains = Vec::with_capacity(plan.agent_count());
    let mut entry_times: Vec<Vec<usize>> = Vec::with_capacity(plan.agent_count());
    for path in &plan.paths {
        let mut locs = Vec::new();
        let mut times = Vec::new();
        for (t, &loc) in path.iter().enumerate() {
            if locs.last() != Some(&loc) {
                locs.push(loc);
                times.push(t);
            }
        }
        chains.push(AgentChain::unit(locs));
        entry_times.push(times);
    }

    // Group visits by location; distinct entry times are guaranteed by
    // vertex-conflict freedom, so first-come order is well defined.
    let mut visits: HashMap<u32, Vec<(usize, u32, u32)>> = HashMap::new();
    for (a, chain) in chains.iter().enumerate() {
        for (step, &loc) in chain.locs.iter().enumerate() {
            visits.entry(loc).or_default().push((
                entry_times[a][step],
                a as u32,
                step as u32,
            ));
        }
    }
    let mut pairs = Vec::new();
    let mut keyed: Vec<_> = visits.into_iter().collect();
    keyed.sort_unstable_by_key(|&(loc, _)| loc);
    for (_, mut list) in keyed {
        list.sort_unstable();
        for earlier in 0..list.len() {
            for later in earlier + 1..list.len() {
                let (_, ja, js) = list[earlier];
                let (_, ia, is) = list[later];
                if ja != ia {
                    pairs.push(Type2Pair {
                        i_vertex: VertexId::new(ia, is),
                        j_vertex: VertexId::new(ja, js),
                        state: EdgeState::Fixed,
                    });
                }
            }
        }
    }
    Ok(Tpg::new(Stpg::from_parts(chains, pairs)?).expect("all pairs fixed"))
}

/// One stretched move: leaving step `step` of `agent`'s route takes
/// `1 + duration` timesteps instead of 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DelayEntry {
    pub agent: u32,
    pub step: u32,
    pub duration: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DelayScenario {
    pub entries: Vec<DelayEntry>,
}

/// Stretches the delayed route edges. Several delays on one edge add up.
pub fn apply_delays(tpg: &Tpg, scenario: &DelayScenario) -> Result<Tpg, PlanError> {
    let g = tpg.as_stpg();
    let mut chains: Vec<AgentChain> =
        (0..g.agent_count() as u32).map(|a| g.chain(a).clone()).collect();
    for &DelayEntry { agent, step, duration } in &scenario.entries {
        let out_of_range = agent as usize >= chains.len()
            || step >= chains[agent as usize].costs.len() as u32;
        if out_of_range {
            return Err(PlanError::BadDelay { agent, step });
        }
        chains[agent as usize].costs[step as usize] += duration;
    }
    let pairs = g.pairs().collect();
    Ok(Tpg::new(Stpg::from_parts(chains, pairs)?).expect("pair states unchanged"))
}

/// Opens every ordering decision that can still physically go either way:
/// the later visitor must not already be past the location (its next vertex
/// has to exist) and the earlier visitor must not start there.
pub fn to_stpg(tpg: &Tpg) -> Stpg {
    let g = tpg.as_stpg();
    let chains: Vec<AgentChain> = (0..g.agent_count() as u32).map(|a| g.chain(a).clone()).collect();
    let pairs = g
        .pairs()
        .map(|p| {
            let flippable = p.i_vertex.step < g.z(p.i_vertex.agent) && p.j_vertex.step >= 1;
            Type2Pair {
                state: if flippable { EdgeState::Switchable } else { EdgeState::Fixed },
                ..p
            }
        })
        .collect();
    Stpg::from_parts(chains, pairs).expect("reshaping preserves validity")
}

/// How much of the timeline a generated scenario covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioMode {
    /// Stop after the first timestep that delays anyone: one synchronized
    /// batch of delays, the default.
    FirstBatch,
    /// Keep rolling for every step of every route.
    FullHorizon,
}

/// Rolls a delay with probability `prob` for each route step, sweeping
/// step positions in time order, with durations uniform in
/// `duration_range` (inclusive). Retries up to a hundred sweeps so that low
/// probabilities still usually yield a nonempty scenario.
pub fn generate_scenario(
    tpg: &Tpg,
    prob: f64,
    duration_range: (u32, u32),
    mode: ScenarioMode,
    seed: u64,
) -> DelayScenario {
    let g = tpg.as_stpg();
    let (lo, hi) = duration_range;
    assert!(lo >= 1 && lo <= hi, "duration range must be within 1..");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = (0..g.agent_count() as u32).map(|a| g.z(a)).max().unwrap_or(0);
    for _ in 0..100 {
        let mut entries = Vec::new();
        for t in 0..horizon {
            for agent in 0..g.agent_count() as u32 {
                if t < g.z(agent) && rng.gen_bool(prob) {
                    entries.push(DelayEntry {
                        agent,
                        step: t,
                        duration: rng.gen_range(lo..=hi),
                    });
                }
            }
            if mode == ScenarioMode::FirstBatch && !entries.is_empty() {
                return DelayScenario { entries };
            }
        }
        if !entries.is_empty() {
            return DelayScenario { entries };
        }
    }
    DelayScenario::default()
}
