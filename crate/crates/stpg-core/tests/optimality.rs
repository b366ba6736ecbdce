//! Randomized end-to-end optimality: every search configuration must return
//! exactly the cost the brute-force settlement enumeration finds, the
//! returned graph must execute at that cost, and the bound driving the
//! search must never overshoot the optimum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stpg_core::oracle::enumerate_optimal;
use stpg_core::synth::{random_delays, random_plan};
use stpg_core::{
    apply_delays, build_tpg, optimize, optimize_observed, simulate_execution, to_stpg, Algorithm,
    Branching, GroupingMode, HeuristicMode, LongestPathMode, Outcome, SearchConfig,
    SearchObserver, Stpg,
};

/// A small delayed instance; sizes are kept where the `2^k` oracle is cheap.
fn random_instance(seed: u64) -> Stpg {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let agents = rng.gen_range(2..=4);
    let locations = agents * rng.gen_range(3..=4);
    let plan = random_plan(&mut rng, agents, locations, (3, 8));
    let tpg = build_tpg(&plan).unwrap();
    let count = rng.gen_range(0..=3);
    let delays = random_delays(&mut rng, &tpg, count, 4);
    to_stpg(&apply_delays(&tpg, &delays).unwrap())
}

/// The full configuration grid: both presets' tags crossed with every
/// grouping mode, branching rule, bound, and longest-path strategy.
fn all_configs() -> Vec<SearchConfig> {
    let mut configs = Vec::new();
    for algorithm in [Algorithm::Gses, Algorithm::Igses] {
        for grouping in [GroupingMode::None, GroupingMode::Simple, GroupingMode::Full] {
            for branching in [
                Branching::Random(7),
                Branching::EarliestFirst,
                Branching::AgentFirst,
                Branching::SmallestEdgeSlackFirst,
            ] {
                for heuristic in [HeuristicMode::Plain, HeuristicMode::Stronger] {
                    for longest_path in [LongestPathMode::Scratch, LongestPathMode::Incremental] {
                        configs.push(SearchConfig {
                            algorithm,
                            grouping,
                            branching,
                            heuristic,
                            longest_path,
                            time_limit: None,
                        });
                    }
                }
            }
        }
    }
    assert_eq!(configs.len(), 96);
    configs
}

#[test]
fn every_configuration_matches_the_oracle_on_random_instances() {
    let configs = all_configs();
    let mut checked = 0usize;
    let mut nontrivial = 0usize;
    for seed in 0..150u64 {
        let stpg = random_instance(seed);
        let expected = match enumerate_optimal(&stpg) {
            Ok(e) => e,
            Err(_) => continue, // beyond the enumeration cap
        };
        let best = expected.min_cost.expect("plans always admit their own order");
        checked += 1;
        if stpg.switchable_count() > 0 {
            nontrivial += 1;
        }
        for config in &configs {
            let result = optimize(&stpg, config)
                .unwrap_or_else(|e| panic!("seed {seed}, config {config:?}: {e}"));
            match result.outcome {
                Outcome::Optimal { ref tpg, cost } => {
                    assert_eq!(cost, best, "seed {seed}, config {config:?}");
                    assert_eq!(
                        simulate_execution(tpg).unwrap().total,
                        best,
                        "seed {seed}: solution does not execute at its cost"
                    );
                }
                Outcome::Timeout => panic!("seed {seed}: timeout without a time limit"),
            }
        }
    }
    assert!(checked >= 100, "only {checked} instances fit under the oracle cap");
    assert!(nontrivial >= 50, "only {nontrivial} instances had anything to decide");
}

#[derive(Default)]
struct PopLog {
    bounds: Vec<i64>,
}

impl SearchObserver for PopLog {
    fn node_popped(&mut self, h: i64) {
        self.bounds.push(h);
    }
}

#[test]
fn popped_bounds_never_exceed_the_optimum() {
    for seed in 200..260u64 {
        let stpg = random_instance(seed);
        let Ok(expected) = enumerate_optimal(&stpg) else { continue };
        let best = expected.min_cost.unwrap();
        for config in [SearchConfig::gses(), SearchConfig::igses()] {
            let mut log = PopLog::default();
            let result = optimize_observed(&stpg, &config, &mut log).unwrap();
            assert_eq!(log.bounds.len() as u64, result.expanded);
            // Admissibility: while an optimal solution is still open, no
            // node estimating above it can reach the front of the queue.
            assert!(
                log.bounds.iter().all(|&h| h <= best),
                "seed {seed}: popped bound above the optimum {best}: {:?}",
                log.bounds
            );
            assert_eq!(*log.bounds.last().unwrap(), best, "seed {seed}");
        }
    }
}
