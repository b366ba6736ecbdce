//! The benchmark harness: sweeps map sizes × agent counts × seeded
//! instances × named configurations, runs searches in parallel (each worker
//! owns one instance end to end), and renders a CSV with per-run rows
//! followed by a `# aggregate` section of per-cell success rates and means.

use crate::planner::{plan_on_map, random_map};
use crate::Failure;
use rayon::prelude::*;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;
use stpg_core::{
    apply_delays, build_tpg, generate_scenario, optimize, to_stpg, Branching, GroupingMode,
    HeuristicMode, LongestPathMode, Outcome, ScenarioMode, SearchConfig,
};

#[derive(Debug, Clone, Deserialize)]
pub struct BenchConfig {
    pub map_sizes: Vec<usize>,
    #[serde(default = "default_density")]
    pub obstacle_density: f64,
    pub agent_counts: Vec<usize>,
    pub instances_per_point: usize,
    pub delay_probability: f64,
    #[serde(default = "default_range")]
    pub delay_range: (u32, u32),
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_time_limit")]
    pub time_limit_s: f64,
    /// 0 lets the thread pool pick its own width.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_configs")]
    pub configs: Vec<String>,
}

fn default_density() -> f64 {
    0.1
}

fn default_range() -> (u32, u32) {
    (10, 20)
}

fn default_time_limit() -> f64 {
    16.0
}

fn default_configs() -> Vec<String> {
    vec!["gses".into(), "igses".into()]
}

/// Resolves a configuration name: `gses`, `igses`, or `gses+<feature>` with
/// exactly one of the four improvements switched on (`grouping`,
/// `branching`, `heuristic`, `incremental`), mirroring one-at-a-time
/// ablations.
pub fn named_config(name: &str) -> Option<SearchConfig> {
    let mut parts = name.split('+');
    let mut config = match parts.next()? {
        "gses" => SearchConfig::gses(),
        "igses" => SearchConfig::igses(),
        _ => return None,
    };
    for feature in parts {
        match feature {
            "grouping" => config.grouping = GroupingMode::Full,
            "branching" => config.branching = Branching::SmallestEdgeSlackFirst,
            "heuristic" => config.heuristic = HeuristicMode::Stronger,
            "incremental" => config.longest_path = LongestPathMode::Incremental,
            _ => return None,
        }
    }
    Some(config)
}

/// One search on one instance, flattened for the CSV.
#[derive(Debug, Clone)]
pub struct InstanceRow {
    pub instance: usize,
    pub map_size: usize,
    pub agents: usize,
    pub p: f64,
    pub seed: u64,
    pub config: String,
    pub outcome: String,
    pub cost: Option<i64>,
    pub expanded: u64,
    pub generated: u64,
    pub search_time_s: f64,
    pub flpl_s: f64,
    pub blpl_s: f64,
    pub heuristic_s: f64,
    pub branch_s: f64,
    pub cycle_s: f64,
    pub other_s: f64,
    pub settled: usize,
    pub switchable: usize,
}

impl InstanceRow {
    pub fn map_label(&self) -> String {
        format!("{0}x{0}", self.map_size)
    }

    pub fn solved(&self) -> bool {
        self.outcome == "optimal"
    }
}

struct Job {
    instance: usize,
    map_size: usize,
    agents: usize,
    seed: u64,
}

fn run_job(cfg: &BenchConfig, configs: &[(String, SearchConfig)], job: &Job) -> Result<Vec<InstanceRow>, Failure> {
    use rand::{Rng, SeedableRng};
    let mut stpg = None;
    for attempt in 0..32u64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
            job.seed.wrapping_add(attempt.wrapping_mul(0x9E3779B97F4A7C15)),
        );
        let map = random_map(&mut rng, job.map_size, cfg.obstacle_density);
        let Some(plan) = plan_on_map(&mut rng, &map, job.agents, 20) else {
            continue;
        };
        let tpg = build_tpg(&plan)
            .map_err(|e| Failure::Internal(format!("planner produced an invalid plan: {e}")))?;
        let scenario = generate_scenario(
            &tpg,
            cfg.delay_probability,
            cfg.delay_range,
            ScenarioMode::FirstBatch,
            rng.gen(),
        );
        let delayed = apply_delays(&tpg, &scenario)
            .map_err(|e| Failure::Internal(format!("generated scenario out of range: {e}")))?;
        stpg = Some(to_stpg(&delayed));
        break;
    }
    let Some(stpg) = stpg else {
        return Err(Failure::Internal(format!(
            "could not place {} agents on a {}x{} map",
            job.agents, job.map_size, job.map_size
        )));
    };
    let mut rows = Vec::with_capacity(configs.len());
    for (name, search_config) in configs {
        let mut search_config = search_config.clone();
        search_config.time_limit = Some(Duration::from_secs_f64(cfg.time_limit_s));
        let result = optimize(&stpg, &search_config)
            .map_err(|e| Failure::Internal(format!("search failed on a valid instance: {e}")))?;
        let (outcome, cost) = match result.outcome {
            Outcome::Optimal { cost, .. } => ("optimal".to_string(), Some(cost)),
            Outcome::Timeout => ("timeout".to_string(), None),
        };
        rows.push(InstanceRow {
            instance: job.instance,
            map_size: job.map_size,
            agents: job.agents,
            p: cfg.delay_probability,
            seed: job.seed,
            config: name.clone(),
            outcome,
            cost,
            expanded: result.expanded,
            generated: result.generated,
            search_time_s: result.elapsed.as_secs_f64(),
            flpl_s: result.phases.flpl.as_secs_f64(),
            blpl_s: result.phases.blpl.as_secs_f64(),
            heuristic_s: result.phases.heuristic.as_secs_f64(),
            branch_s: result.phases.branch.as_secs_f64(),
            cycle_s: result.phases.cycle.as_secs_f64(),
            other_s: result.phases.other.as_secs_f64(),
            settled: result.settled_edges,
            switchable: stpg.switchable_count(),
        });
    }
    Ok(rows)
}

/// Runs the whole sweep. Rows come back sorted by (map, agents, instance,
/// config) regardless of scheduling, so the CSV is deterministic.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<InstanceRow>, Failure> {
    let configs: Vec<(String, SearchConfig)> = cfg
        .configs
        .iter()
        .map(|name| {
            named_config(name)
                .map(|c| (name.clone(), c))
                .ok_or_else(|| Failure::Validation(format!("unknown config {name:?}")))
        })
        .collect::<Result<_, _>>()?;
    let mut jobs = Vec::new();
    for &map_size in &cfg.map_sizes {
        for &agents in &cfg.agent_counts {
            for instance in 0..cfg.instances_per_point {
                let idx = jobs.len() as u64;
                jobs.push(Job {
                    instance,
                    map_size,
                    agents,
                    seed: cfg.seed.wrapping_add(idx.wrapping_mul(0x9E3779B97F4A7C15)),
                });
            }
        }
    }
    let work = || -> Result<Vec<Vec<InstanceRow>>, Failure> {
        jobs.par_iter().map(|job| run_job(cfg, &configs, job)).collect()
    };
    let nested = if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Failure::Internal(format!("thread pool: {e}")))?
            .install(work)
    } else {
        work()
    }?;
    let mut rows: Vec<InstanceRow> = nested.into_iter().flatten().collect();
    let order: BTreeMap<&str, usize> =
        cfg.configs.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    rows.sort_by_key(|r| (r.map_size, r.agents, r.instance, order[r.config.as_str()]));
    Ok(rows)
}

/// Per-(map, agents, config) success rate and means over solved runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub map_label: String,
    pub agents: usize,
    pub config: String,
    pub instances: usize,
    pub solved: usize,
    pub mean_search_time_s: f64,
    pub mean_expanded: f64,
    pub mean_cost: f64,
}

pub fn aggregate(rows: &[InstanceRow]) -> Vec<Aggregate> {
    let mut cells: BTreeMap<(usize, usize, String), Vec<&InstanceRow>> = BTreeMap::new();
    for row in rows {
        cells.entry((row.map_size, row.agents, row.config.clone())).or_default().push(row);
    }
    cells
        .into_iter()
        .map(|((map_size, agents, config), rows)| {
            let solved: Vec<&&InstanceRow> = rows.iter().filter(|r| r.solved()).collect();
            let n = solved.len().max(1) as f64;
            Aggregate {
                map_label: format!("{map_size}x{map_size}"),
                agents,
                config,
                instances: rows.len(),
                solved: solved.len(),
                mean_search_time_s: solved.iter().map(|r| r.search_time_s).sum::<f64>() / n,
                mean_expanded: solved.iter().map(|r| r.expanded as f64).sum::<f64>() / n,
                mean_cost: solved.iter().map(|r| r.cost.unwrap() as f64).sum::<f64>() / n,
            }
        })
        .collect()
}

pub fn write_csv(rows: &[InstanceRow]) -> String {
    let mut out = String::from(
        "instance,map,agents,p,seed,config,outcome,cost,expanded,generated,search_time_s,\
         flpl_s,blpl_s,heuristic_s,branch_s,cycle_s,other_s,settled,switchable\n",
    );
    for r in rows {
        let cost = r.cost.map_or(String::new(), |c| c.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{cost},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{}",
            r.instance,
            r.map_label(),
            r.agents,
            r.p,
            r.seed,
            r.config,
            r.outcome,
            r.expanded,
            r.generated,
            r.search_time_s,
            r.flpl_s,
            r.blpl_s,
            r.heuristic_s,
            r.branch_s,
            r.cycle_s,
            r.other_s,
            r.settled,
            r.switchable,
        );
    }
    out.push_str("# aggregate\n");
    out.push_str("map,agents,config,instances,solved,success_rate,mean_search_time_s,mean_expanded,mean_cost\n");
    for a in aggregate(rows) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.3},{:.6},{:.1},{:.1}",
            a.map_label,
            a.agents,
            a.config,
            a.instances,
            a.solved,
            a.solved as f64 / a.instances as f64,
            a.mean_search_time_s,
            a.mean_expanded,
            a.mean_cost,
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_names_resolve() {
        assert_eq!(named_config("gses").unwrap().grouping, GroupingMode::None);
        assert_eq!(named_config("igses").unwrap().grouping, GroupingMode::Full);
        let ab = named_config("gses+heuristic").unwrap();
        assert_eq!(ab.heuristic, HeuristicMode::Stronger);
        assert_eq!(ab.longest_path, LongestPathMode::Scratch);
        assert!(named_config("sges").is_none());
        assert!(named_config("gses+turbo").is_none());
    }

    #[test]
    fn a_tiny_sweep_produces_deterministic_rows() {
        let cfg = BenchConfig {
            map_sizes: vec![8],
            obstacle_density: 0.1,
            agent_counts: vec![3],
            instances_per_point: 2,
            delay_probability: 0.05,
            delay_range: (2, 4),
            seed: 11,
            time_limit_s: 16.0,
            workers: 2,
            configs: vec!["gses".into(), "igses".into()],
        };
        let rows = run_bench(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        let again = run_bench(&cfg).unwrap();
        for (a, b) in rows.iter().zip(&again) {
            assert_eq!((a.instance, &a.config, a.cost, a.expanded), (b.instance, &b.config, b.cost, b.expanded));
        }
        // Costs agree between configurations on every mutually solved instance.
        for pair in rows.chunks(2) {
            if pair.iter().all(|r| r.solved()) {
                assert_eq!(pair[0].cost, pair[1].cost);
            }
        }
        let csv = write_csv(&rows);
        assert!(csv.contains("# aggregate"));
        assert!(csv.lines().count() >= 8);
    }
}
