//! Random plan generation over abstract locations.
//!
//! Produces small conflict-free plans for randomized testing without
//! dragging in maps or routing: locations are an unstructured pool and any
//! location can follow any other. Agents are laid down one after the other,
//! each picking random positions that keep the growing plan free of vertex
//! and following conflicts against everyone placed before it, with everyone
//! parked on their final location afterwards.

use crate::graph::Tpg;
use crate::plan::{validate_plan, DelayEntry, DelayScenario, MapfPlan};
use rand::Rng;

/// Position of a finished path at time `t`, parked at the end.
fn occupied(path: &[u32], t: usize) -> u32 {
    path[t.min(path.len() - 1)]
}

fn pick_step(
    rng: &mut impl Rng,
    placed: &[Vec<u32>],
    me: &[u32],
    locations: usize,
    t: usize,
    last: bool,
) -> Option<u32> {
    let allowed: Vec<u32> = (0..locations as u32)
        .filter(|&c| {
            placed.iter().all(|other| {
                let still_fine = c != occupied(other, t)
                    && c != occupied(other, t + 1)
                    && (t == 0 || c == me[t - 1] || c != occupied(other, t - 1));
                if !still_fine {
                    return false;
                }
                if last {
                    // Parking forever: the cell must stay clear of this
                    // agent for good, starting one step before arrival.
                    let from = t.saturating_sub(1);
                    (from..other.len()).all(|s| other[s] != c)
                        && *other.last().unwrap() != c
                } else {
                    true
                }
            })
        })
        .collect();
    if allowed.is_empty() {
        None
    } else {
        Some(allowed[rng.gen_range(0..allowed.len())])
    }
}

/// Generates a conflict-free plan of `agents` random walks over an
/// unstructured pool of `locations`, each `len_range.0..=len_range.1`
/// timesteps long. Panics if the pool is too cramped to place everyone
/// after many retries; give it roughly two locations per agent or more.
pub fn random_plan(
    rng: &mut impl Rng,
    agents: usize,
    locations: usize,
    len_range: (usize, usize),
) -> MapfPlan {
    assert!(agents >= 1 && len_range.0 >= 1 && len_range.0 <= len_range.1);
    'instance: for _ in 0..200 {
        let mut placed: Vec<Vec<u32>> = Vec::with_capacity(agents);
        'agent: while placed.len() < agents {
            let n = rng.gen_range(len_range.0..=len_range.1);
            for _ in 0..50 {
                let mut me = Vec::with_capacity(n);
                for t in 0..n {
                    match pick_step(rng, &placed, &me, locations, t, t + 1 == n) {
                        Some(c) => me.push(c),
                        None => break,
                    }
                }
                if me.len() == n {
                    placed.push(me);
                    continue 'agent;
                }
            }
            continue 'instance;
        }
        let plan = MapfPlan::from_named_paths(
            placed
                .iter()
                .map(|p| p.iter().map(|&c| format!("L{c}")).collect())
                .collect(),
        );
        debug_assert_eq!(validate_plan(&plan, None), Ok(()));
        return plan;
    }
    panic!("could not place {agents} agents on {locations} locations");
}

/// `count` random delays of 1..=`max_duration` on random route steps.
/// Agents whose routes collapse to a single stop have no step to delay and
/// are skipped; if nobody moves the scenario is empty.
pub fn random_delays(rng: &mut impl Rng, tpg: &Tpg, count: usize, max_duration: u32) -> DelayScenario {
    let g = tpg.as_stpg();
    let movers: Vec<u32> = (0..g.agent_count() as u32).filter(|&a| g.z(a) > 0).collect();
    if movers.is_empty() {
        return DelayScenario { entries: Vec::new() };
    }
    let entries = (0..count)
        .map(|_| {
            let agent = movers[rng.gen_range(0..movers.len())];
            DelayEntry {
                agent,
                step: rng.gen_range(0..g.z(agent)),
                duration: rng.gen_range(1..=max_duration),
            }
        })
        .collect();
    DelayScenario { entries }
}
