//! Grouping correctness on random instances, checked two ways: the
//! settlement-enumeration oracle confirms soundness (and maximality for the
//! exact mode), and property tests pin down the algebra of the coordinate
//! calculus the grouping is built on.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stpg_core::grouping::{find_groupable_edges, reverse_coords};
use stpg_core::oracle::{verify_groups, OracleError};
use stpg_core::synth::{random_delays, random_plan};
use stpg_core::{apply_delays, build_tpg, to_stpg, GroupSet, GroupingMode, Stpg};

fn random_instance(seed: u64) -> Stpg {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let agents = rng.gen_range(2..=4);
    let locations = agents * 3;
    let plan = random_plan(&mut rng, agents, locations, (4, 10));
    let tpg = build_tpg(&plan).unwrap();
    let count = rng.gen_range(0..=3);
    let delays = random_delays(&mut rng, &tpg, count, 4);
    to_stpg(&apply_delays(&tpg, &delays).unwrap())
}

#[test]
fn computed_groups_verify_on_random_instances() {
    let mut verified = 0usize;
    for seed in 0..200u64 {
        let stpg = random_instance(seed);
        for mode in [GroupingMode::None, GroupingMode::Simple, GroupingMode::Full] {
            let gs = GroupSet::compute(&stpg, mode);
            // Structural sanity: the groups partition the pairs and the
            // reverse index agrees with the membership lists.
            assert_eq!(gs.pair_to_group.len(), stpg.pair_count());
            let mut seen = vec![false; stpg.pair_count()];
            for (gid, group) in gs.groups.iter().enumerate() {
                assert_eq!(group.id, gid);
                assert!(!group.members.is_empty());
                for &m in &group.members {
                    assert!(!seen[m], "pair {m} in two groups");
                    seen[m] = true;
                    assert_eq!(gs.pair_to_group[m], gid);
                }
            }
            assert!(seen.iter().all(|&s| s), "some pair belongs to no group");
            match verify_groups(&stpg, &gs) {
                Ok(()) => verified += 1,
                Err(OracleError::TooLarge(_)) => {} // beyond the enumeration cap
                Err(e) => panic!("seed {seed} mode {mode:?}: {e}"),
            }
        }
    }
    assert!(verified >= 400, "only {verified} groupings were verifiable");
}

#[test]
fn simple_grouping_refines_the_exact_one() {
    for seed in 300..400u64 {
        let stpg = random_instance(seed);
        let full = GroupSet::compute(&stpg, GroupingMode::Full);
        let simple = GroupSet::compute(&stpg, GroupingMode::Simple);
        for group in &simple.groups {
            let target = full.pair_to_group[group.members[0]];
            assert!(
                group.members.iter().all(|&m| full.pair_to_group[m] == target),
                "seed {seed}: a consecutive chain straddles two exact groups"
            );
        }
    }
}

proptest! {
    #[test]
    fn mirroring_is_an_involution(m in 1u32..10_000, n in 0u32..10_000) {
        prop_assert_eq!(reverse_coords(reverse_coords((m, n))), (m, n));
    }

    /// Mutual forcing is reflexive, symmetric, and transitive on any edge
    /// set, which is what lets the exact mode claim whole groups at once.
    #[test]
    fn groupability_is_an_equivalence(
        edges in prop::collection::vec((1u32..10, 0u32..10), 1..10)
    ) {
        let masks: Vec<Vec<bool>> =
            (0..edges.len()).map(|i| find_groupable_edges(&edges, i)).collect();
        for i in 0..edges.len() {
            prop_assert!(masks[i][i]);
            for j in 0..edges.len() {
                prop_assert_eq!(masks[i][j], masks[j][i]);
                for k in 0..edges.len() {
                    if masks[i][j] && masks[j][k] {
                        prop_assert!(masks[i][k]);
                    }
                }
            }
        }
    }
}
