//! Micro-benchmarks: baseline vs improved search on generated instances,
//! longest-path maintenance from scratch vs incrementally, and the cost of
//! computing edge groups.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;
use stpg_core::longest_paths::{blpl, blpl_incremental, flpl, flpl_incremental};
use stpg_core::synth::{random_delays, random_plan};
use stpg_core::{
    apply_delays, build_tpg, optimize, to_stpg, GroupSet, GroupingMode, SearchConfig,
    SettleDirection, Stpg,
};

/// A delayed instance from the synthetic pool generator. Larger `scale`
/// means more agents sharing more locations.
fn instance(seed: u64, scale: usize) -> Stpg {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let agents = 3 + scale;
    let plan = random_plan(&mut rng, agents, agents * 3, (4, 8 + scale));
    let tpg = build_tpg(&plan).expect("generated plans validate");
    let delays = random_delays(&mut rng, &tpg, 2 + scale / 2, 6);
    to_stpg(&apply_delays(&tpg, &delays).expect("delays in range"))
}

/// Instances that give the search some work without blowing up the baseline.
fn search_pool() -> Vec<Stpg> {
    (0..12).map(|seed| instance(900 + seed, 2)).collect()
}

fn bench_optimize(c: &mut Criterion) {
    let pool = search_pool();
    let mut group = c.benchmark_group("optimize");
    for (name, config) in [("gses", SearchConfig::gses()), ("igses", SearchConfig::igses())] {
        group.bench_with_input(BenchmarkId::new(name, "pool12"), &pool, |b, pool| {
            b.iter(|| {
                for stpg in pool {
                    black_box(optimize(stpg, &config).expect("solvable"));
                }
            })
        });
    }
    group.finish();
}

fn bench_longest_paths(c: &mut Criterion) {
    // Settle one switchable pair and measure recomputing lengths from
    // scratch vs propagating just the inserted edges.
    let stpg = instance(41, 3);
    let pair = stpg.switchable_pairs().next().expect("has switchable pairs");
    let settled = stpg.settle(&[pair], SettleDirection::Fix).expect("settles");
    let new_edges = stpg.edges_for(&[pair], SettleDirection::Fix);
    let mut base = flpl(&stpg).expect("acyclic");
    blpl(&stpg, &mut base);
    assert!(flpl(&settled).is_ok(), "fix direction stays acyclic here");

    let mut group = c.benchmark_group("longest_paths");
    group.bench_function("scratch", |b| {
        b.iter(|| {
            let mut state = flpl(black_box(&settled)).unwrap();
            blpl(&settled, &mut state);
            black_box(state)
        })
    });
    group.bench_function("incremental", |b| {
        b.iter(|| {
            let mut state = base.clone();
            blpl_incremental(&mut state, &settled, &new_edges).unwrap();
            flpl_incremental(&mut state, &settled, &new_edges).unwrap();
            black_box(state)
        })
    });
    group.finish();
}

fn bench_grouping(c: &mut Criterion) {
    let stpg = instance(77, 4);
    let mut group = c.benchmark_group("grouping");
    for mode in [GroupingMode::Simple, GroupingMode::Full] {
        group.bench_with_input(
            BenchmarkId::new("compute", format!("{mode:?}")),
            &mode,
            |b, &mode| b.iter(|| black_box(GroupSet::compute(black_box(&stpg), mode))),
        );
    }
    group.finish();
}

criterion_group!(benches, bench_optimize, bench_longest_paths, bench_grouping);
criterion_main!(benches);
