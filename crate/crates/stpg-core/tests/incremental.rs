//! Incremental longest-path maintenance must be indistinguishable from
//! recomputing: after every settlement batch the carried-forward state has
//! to match a scratch sweep exactly, and batches that close a cycle have to
//! be caught by each incremental update on its own.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stpg_core::longest_paths::{blpl, blpl_incremental, flpl, flpl_incremental};
use stpg_core::oracle::naive_longest_paths;
use stpg_core::synth::{random_delays, random_plan};
use stpg_core::{apply_delays, build_tpg, to_stpg, LongestPathState, SettleDirection, Stpg};

fn random_instance(seed: u64) -> Stpg {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let agents = rng.gen_range(2..=5);
    let locations = agents * 3;
    let plan = random_plan(&mut rng, agents, locations, (3, 9));
    let tpg = build_tpg(&plan).unwrap();
    let count = rng.gen_range(0..=4);
    let delays = random_delays(&mut rng, &tpg, count, 5);
    to_stpg(&apply_delays(&tpg, &delays).unwrap())
}

fn assert_states_match(stpg: &Stpg, incremental: &LongestPathState, scratch: &LongestPathState) {
    for v in 0..stpg.vertex_count() {
        assert_eq!(incremental.forward_of(v), scratch.forward_of(v), "forward length at {v}");
        for a in 0..stpg.agent_count() as u32 {
            assert_eq!(
                incremental.backward_of(v, a),
                scratch.backward_of(v, a),
                "backward length at {v} toward agent {a}'s goal"
            );
        }
    }
}

#[test]
fn incremental_matches_scratch_along_random_settlements() {
    let mut batches = 0usize;
    let mut cycles = 0usize;
    for seed in 0..120u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xD1CE + seed);
        let mut g = random_instance(seed);
        let mut state = flpl(&g).unwrap();
        blpl(&g, &mut state);
        loop {
            let mut switchable: Vec<usize> = g.switchable_pairs().collect();
            if switchable.is_empty() {
                break;
            }
            // A mixed batch, like one branching step settling a group plus
            // whatever randomness throws in: some pairs kept, some flipped.
            switchable.shuffle(&mut rng);
            switchable.truncate(rng.gen_range(1..=switchable.len().min(3)));
            let split = rng.gen_range(0..=switchable.len());
            let (fix, rev) = switchable.split_at(split);
            let mut new_edges = g.edges_for(fix, SettleDirection::Fix);
            new_edges.extend(g.edges_for(rev, SettleDirection::Reverse));
            let next = g
                .settle(fix, SettleDirection::Fix)
                .unwrap()
                .settle(rev, SettleDirection::Reverse)
                .unwrap();
            match flpl(&next) {
                Ok(mut scratch) => {
                    blpl(&next, &mut scratch);
                    // Search order: backward first, over stale forward keys.
                    blpl_incremental(&mut state, &next, &new_edges).unwrap();
                    flpl_incremental(&mut state, &next, &new_edges).unwrap();
                    assert_states_match(&next, &state, &scratch);
                    batches += 1;
                    g = next;
                }
                Err(_) => {
                    // The batch closed a cycle; both updates must notice it
                    // independently rather than loop or return stale data.
                    let mut fwd = state.clone();
                    assert!(
                        flpl_incremental(&mut fwd, &next, &new_edges).is_err(),
                        "seed {seed}: forward update missed a cycle"
                    );
                    let mut bwd = state.clone();
                    assert!(
                        blpl_incremental(&mut bwd, &next, &new_edges).is_err(),
                        "seed {seed}: backward update missed a cycle"
                    );
                    cycles += 1;
                    break;
                }
            }
        }
        // The fully settled endpoint of an acyclic walk must also agree
        // with the independent relaxation oracle.
        if g.switchable_count() == 0 {
            let naive = naive_longest_paths(&g).unwrap();
            for v in 0..g.vertex_count() {
                assert_eq!(state.forward_of(v), naive.forward[v]);
                for a in 0..g.agent_count() as u32 {
                    assert_eq!(state.backward_of(v, a), naive.backward_of(v, a));
                }
            }
        }
    }
    assert!(batches >= 100, "only {batches} acyclic batches exercised");
    assert!(cycles >= 10, "only {cycles} cyclic batches exercised");
}
