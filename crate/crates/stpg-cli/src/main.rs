//! Command-line front end: validate plans, build plan graphs, generate
//! delay scenarios, precompute edge groups, run the optimizer, sweep
//! benchmarks, and cross-check against the brute-force oracle.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation failure, 3 timeout,
//! 4 internal error. Failures print a one-line JSON object to stderr.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::time::Duration;
use stpg_cli::formats::{
    read_groups, read_map, read_plan, read_scenario, result_file, write_groups, write_result,
    write_scenario, write_tpg, ConfigEcho, ScenarioHeader,
};
use stpg_cli::bench::{run_bench, write_csv, BenchConfig};
use stpg_cli::{read_input, write_output, Failure};
use stpg_core::{
    apply_delays, build_tpg, generate_scenario, optimize, optimize_with_groups, simulate_execution,
    to_stpg, validate_plan, Branching, GroupSet, GroupingMode, HeuristicMode, LongestPathMode,
    Outcome, ScenarioMode, SearchConfig, SearchError, SearchObserver, Stpg,
};

#[derive(Parser)]
#[command(
    name = "stpg",
    version,
    about = "Builds switchable temporal plan graphs from MAPF plans and finds minimum-cost executable schedules under delays"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a plan file for well-formedness and conflict-freedom.
    Validate {
        plan: PathBuf,
        /// Grid map for adjacency checks (MovingAI .map format).
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Build the temporal plan graph and report its undelayed cost.
    Build {
        plan: PathBuf,
        #[arg(long)]
        map: Option<PathBuf>,
        /// Output file (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sample a random delay scenario for a plan.
    Delay {
        plan: PathBuf,
        /// Per-vertex delay probability in [0, 1].
        #[arg(long, value_parser = parse_probability)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Delay duration range `lo:hi` (inclusive).
        #[arg(long, default_value = "10:20", value_parser = parse_range)]
        range: (u32, u32),
        /// `first` stops at the first timestep that delays anyone (one
        /// synchronized batch); `full` keeps rolling over the whole horizon.
        #[arg(long, value_enum, default_value_t = ModeArg::First)]
        mode: ModeArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Precompute the full edge grouping for a plan and serialize it.
    Group {
        plan: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Find the minimum-cost executable schedule under a delay scenario.
    Optimize {
        plan: PathBuf,
        scenario: PathBuf,
        /// Precomputed groups file from `group` (forces full grouping).
        #[arg(long)]
        groups: Option<PathBuf>,
        #[arg(long, value_enum)]
        algo: AlgoArg,
        #[arg(long, value_enum)]
        grouping: Option<GroupingArg>,
        #[arg(long, value_enum)]
        branching: Option<BranchingArg>,
        #[arg(long, value_enum)]
        heuristic: Option<HeuristicArg>,
        #[arg(long, value_enum)]
        lp: Option<LpArg>,
        /// Search time limit in seconds.
        #[arg(long = "time-limit", default_value_t = 16.0)]
        time_limit: f64,
        /// Seed for random branching.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sweep maps x agent counts x instances x configs; emit a CSV.
    Bench {
        /// JSON benchmark configuration.
        #[arg(long)]
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Parallel worker count (overrides the config; 0 = automatic).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Brute-force the optimum by enumerating every settlement.
    Oracle { plan: PathBuf, scenario: PathBuf },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    Gses,
    Igses,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum GroupingArg {
    None,
    Simple,
    Full,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum BranchingArg {
    Random,
    Earliest,
    Agent,
    Slack,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum HeuristicArg {
    Plain,
    Strong,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum LpArg {
    Scratch,
    Incremental,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    First,
    Full,
}

fn parse_probability(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(format!("probability {p} is outside [0, 1]"))
    }
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("{s:?} is not of the form lo:hi"))?;
    let lo: u32 = lo.parse().map_err(|_| format!("{lo:?} is not an integer"))?;
    let hi: u32 = hi.parse().map_err(|_| format!("{hi:?} is not an integer"))?;
    if lo == 0 || lo > hi {
        return Err(format!("range must satisfy 1 <= lo <= hi, got {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let usage = !matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = err.print();
            if usage {
                eprintln!("{}", serde_json::json!({ "error": "usage error", "code": 1 }));
                std::process::exit(1);
            }
            std::process::exit(0);
        }
    };
    match run(cli.command) {
        Ok(code) => std::process::exit(code),
        Err(failure) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": failure.message(), "code": failure.exit_code() })
            );
            std::process::exit(failure.exit_code());
        }
    }
}

fn emit(output: Option<&Path>, content: &str) -> Result<(), Failure> {
    match output {
        Some(path) => write_output(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn load_plan(path: &Path) -> Result<stpg_core::MapfPlan, Failure> {
    read_plan(&read_input(path)?)
}

/// Plan + scenario -> the delayed switchable graph the optimizer works on.
fn load_instance(plan_path: &Path, scenario_path: &Path) -> Result<(stpg_core::MapfPlan, Stpg), Failure> {
    let plan = load_plan(plan_path)?;
    let scenario = read_scenario(&read_input(scenario_path)?)?;
    let tpg = build_tpg(&plan).map_err(|e| Failure::Validation(e.to_string()))?;
    let delayed = apply_delays(&tpg, &scenario).map_err(|e| Failure::Validation(e.to_string()))?;
    Ok((plan, to_stpg(&delayed)))
}

fn run(command: Command) -> Result<i32, Failure> {
    match command {
        Command::Validate { plan, map } => {
            let plan = load_plan(&plan)?;
            let grid = map.as_deref().map(|m| read_map(&read_input(m)?)).transpose()?;
            validate_plan(&plan, grid.as_ref()).map_err(|e| Failure::Validation(e.to_string()))?;
            println!("valid: agents={} locations={}", plan.agent_count(), plan.location_count());
            Ok(0)
        }
        Command::Build { plan, map, output } => {
            let plan = load_plan(&plan)?;
            let grid = map.as_deref().map(|m| read_map(&read_input(m)?)).transpose()?;
            validate_plan(&plan, grid.as_ref()).map_err(|e| Failure::Validation(e.to_string()))?;
            let tpg = build_tpg(&plan).map_err(|e| Failure::Validation(e.to_string()))?;
            let cost = simulate_execution(&tpg)
                .map_err(|e| Failure::Internal(format!("fresh plan graph failed to execute: {e}")))?
                .total;
            emit(output.as_deref(), &write_tpg(&tpg, &plan, cost))?;
            Ok(0)
        }
        Command::Delay { plan, p, seed, range, mode, output } => {
            let plan = load_plan(&plan)?;
            let tpg = build_tpg(&plan).map_err(|e| Failure::Validation(e.to_string()))?;
            let (mode, mode_name) = match mode {
                ModeArg::First => (ScenarioMode::FirstBatch, "first"),
                ModeArg::Full => (ScenarioMode::FullHorizon, "full"),
            };
            let scenario = generate_scenario(&tpg, p, range, mode, seed);
            let header = ScenarioHeader { p, seed, range, mode: mode_name };
            emit(output.as_deref(), &write_scenario(&scenario, Some(&header)))?;
            Ok(0)
        }
        Command::Group { plan, output } => {
            let plan = load_plan(&plan)?;
            let tpg = build_tpg(&plan).map_err(|e| Failure::Validation(e.to_string()))?;
            let stpg = to_stpg(&tpg);
            let groups = GroupSet::compute(&stpg, GroupingMode::Full);
            emit(output.as_deref(), &write_groups(&stpg, &groups, &plan))?;
            Ok(0)
        }
        Command::Optimize {
            plan,
            scenario,
            groups,
            algo,
            grouping,
            branching,
            heuristic,
            lp,
            time_limit,
            seed,
            output,
        } => {
            let (plan, stpg) = load_instance(&plan, &scenario)?;
            let mut config = match algo {
                AlgoArg::Gses => SearchConfig::gses(),
                AlgoArg::Igses => SearchConfig::igses(),
            };
            if let Some(g) = grouping {
                config.grouping = match g {
                    GroupingArg::None => GroupingMode::None,
                    GroupingArg::Simple => GroupingMode::Simple,
                    GroupingArg::Full => GroupingMode::Full,
                };
            }
            if let Some(b) = branching {
                config.branching = match b {
                    BranchingArg::Random => Branching::Random(seed),
                    BranchingArg::Earliest => Branching::EarliestFirst,
                    BranchingArg::Agent => Branching::AgentFirst,
                    BranchingArg::Slack => Branching::SmallestEdgeSlackFirst,
                };
            }
            if let Some(h) = heuristic {
                config.heuristic = match h {
                    HeuristicArg::Plain => HeuristicMode::Plain,
                    HeuristicArg::Strong => HeuristicMode::Stronger,
                };
            }
            if let Some(l) = lp {
                config.longest_path = match l {
                    LpArg::Scratch => LongestPathMode::Scratch,
                    LpArg::Incremental => LongestPathMode::Incremental,
                };
            }
            config.time_limit = Some(Duration::from_secs_f64(time_limit));

            let precomputed = match &groups {
                Some(path) => {
                    // The file is a full-mode partition; branch on it as such.
                    config.grouping = GroupingMode::Full;
                    Some(read_groups(&read_input(path)?, &plan, &stpg)?)
                }
                None => None,
            };
            let echo = ConfigEcho {
                algorithm: match algo {
                    AlgoArg::Gses => "gses".into(),
                    AlgoArg::Igses => "igses".into(),
                },
                grouping: match config.grouping {
                    GroupingMode::None => "none".into(),
                    GroupingMode::Simple => "simple".into(),
                    GroupingMode::Full => "full".into(),
                },
                branching: match config.branching {
                    Branching::Random(_) => "random".into(),
                    Branching::EarliestFirst => "earliest".into(),
                    Branching::AgentFirst => "agent".into(),
                    Branching::SmallestEdgeSlackFirst => "slack".into(),
                },
                heuristic: match config.heuristic {
                    HeuristicMode::Plain => "plain".into(),
                    HeuristicMode::Stronger => "strong".into(),
                },
                lp: match config.longest_path {
                    LongestPathMode::Scratch => "scratch".into(),
                    LongestPathMode::Incremental => "incremental".into(),
                },
                time_limit_s: Some(time_limit),
                seed,
                precomputed_groups: precomputed.is_some(),
            };
            let result = match &precomputed {
                Some(set) => optimize_with_groups(&stpg, &config, set, &mut NoObserver),
                None => optimize(&stpg, &config),
            }
            .map_err(|e| match e {
                SearchError::Unexecutable => Failure::Validation(e.to_string()),
            })?;
            let timed_out = matches!(result.outcome, Outcome::Timeout);
            let file = result_file(&stpg, &result, echo);
            emit(output.as_deref(), &write_result(&file))?;
            Ok(if timed_out { 3 } else { 0 })
        }
        Command::Bench { config, output, workers } => {
            let mut cfg: BenchConfig = serde_json::from_str(&read_input(&config)?)
                .map_err(|e| Failure::Validation(format!("bench config: {e}")))?;
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let rows = run_bench(&cfg)?;
            emit(output.as_deref(), &write_csv(&rows))?;
            Ok(0)
        }
        Command::Oracle { plan, scenario } => {
            let (_plan, stpg) = load_instance(&plan, &scenario)?;
            let enumeration = stpg_core::oracle::enumerate_optimal(&stpg).map_err(|e| match e {
                stpg_core::oracle::OracleError::TooLarge(_) => Failure::Validation(e.to_string()),
                _ => Failure::Internal(e.to_string()),
            })?;
            println!(
                "{}",
                serde_json::json!({
                    "minimum": enumeration.min_cost,
                    "acyclic": enumeration.acyclic_count,
                })
            );
            Ok(0)
        }
    }
}

/// Observer stub for `optimize_with_groups`, which takes the hook trait.
struct NoObserver;

impl SearchObserver for NoObserver {}
