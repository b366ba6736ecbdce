//! On-disk formats, all line-oriented text or JSON.
//!
//! - Plan: `agents <n>` then one `agent <i>: loc0 loc1 ...` line per agent,
//!   one location token per timestep.
//! - Scenario: optional `scenario p=.. seed=.. range=a:b mode=..` header,
//!   then `delay agent=<i> step=<p> duration=<d>` lines.
//! - Map: the MovingAI grid format (`type`/`height`/`width`/`map` header and
//!   one row of terrain characters per line).
//! - Groups: versioned JSON keyed by a hash of the plan's canonical form.
//! - Result: a JSON object with a fixed key set, written by `optimize`.

use crate::Failure;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::fmt::Write as _;
use stpg_core::{
    DelayEntry, DelayScenario, EdgeGroup, EdgeState, GridMap, GroupSet, GroupingMode, MapfPlan,
    Outcome, SearchResult, Stpg, Tpg,
};

/// Lines that carry content: blanks and `#` comments are skipped.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn bad(line: usize, what: impl std::fmt::Display) -> Failure {
    Failure::Validation(format!("line {line}: {what}"))
}

// ---------------------------------------------------------------- plans

pub fn read_plan(text: &str) -> Result<MapfPlan, Failure> {
    let mut lines = content_lines(text);
    let (ln, header) = lines.next().ok_or_else(|| Failure::Validation("empty plan file".into()))?;
    let count: usize = header
        .strip_prefix("agents ")
        .and_then(|n| n.trim().parse().ok())
        .ok_or_else(|| bad(ln, "expected `agents <n>`"))?;
    let mut paths: Vec<Option<Vec<String>>> = vec![None; count];
    for (ln, line) in lines {
        let rest = line.strip_prefix("agent ").ok_or_else(|| bad(ln, "expected `agent <i>: ...`"))?;
        let (id, locs) = rest.split_once(':').ok_or_else(|| bad(ln, "missing `:`"))?;
        let id: usize = id.trim().parse().map_err(|_| bad(ln, "bad agent id"))?;
        if id >= count {
            return Err(bad(ln, format!("agent {id} out of range (agents {count})")));
        }
        if paths[id].is_some() {
            return Err(bad(ln, format!("agent {id} listed twice")));
        }
        let tokens: Vec<String> = locs.split_whitespace().map(str::to_owned).collect();
        if tokens.is_empty() {
            return Err(bad(ln, format!("agent {id} has no locations")));
        }
        paths[id] = Some(tokens);
    }
    let paths: Vec<Vec<String>> = paths
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or_else(|| Failure::Validation(format!("agent {i} missing"))))
        .collect::<Result<_, _>>()?;
    Ok(MapfPlan::from_named_paths(paths))
}

pub fn write_plan(plan: &MapfPlan) -> String {
    let mut out = format!("agents {}\n", plan.agent_count());
    for a in 0..plan.agent_count() as u32 {
        let _ = write!(out, "agent {a}:");
        for &loc in plan.path(a) {
            let _ = write!(out, " {}", plan.location_name(loc));
        }
        out.push('\n');
    }
    out
}

/// Hex digest of the plan's canonical serialization, so cosmetic edits to
/// the file (comments, spacing) don't invalidate caches built from it.
pub fn plan_digest(plan: &MapfPlan) -> String {
    let mut hasher = Sha256::new();
    hasher.update(write_plan(plan).as_bytes());
    let digest = hasher.finalize();
    digest.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

// ------------------------------------------------------------- scenarios

pub fn read_scenario(text: &str) -> Result<DelayScenario, Failure> {
    let mut entries = Vec::new();
    for (ln, line) in content_lines(text) {
        if line.starts_with("scenario") {
            continue; // generation parameters, informational only
        }
        let rest = line
            .strip_prefix("delay ")
            .ok_or_else(|| bad(ln, "expected `delay agent=<i> step=<p> duration=<d>`"))?;
        let mut agent = None;
        let mut step = None;
        let mut duration = None;
        for token in rest.split_whitespace() {
            let (key, value) = token.split_once('=').ok_or_else(|| bad(ln, "expected key=value"))?;
            let value: u32 = value.parse().map_err(|_| bad(ln, format!("bad value in {token}")))?;
            match key {
                "agent" => agent = Some(value),
                "step" => step = Some(value),
                "duration" => duration = Some(value),
                other => return Err(bad(ln, format!("unknown field {other}"))),
            }
        }
        match (agent, step, duration) {
            (Some(agent), Some(step), Some(duration)) => {
                entries.push(DelayEntry { agent, step, duration });
            }
            _ => return Err(bad(ln, "need agent=, step= and duration=")),
        }
    }
    Ok(DelayScenario { entries })
}

/// Generation parameters echoed in a scenario file's header line.
pub struct ScenarioHeader {
    pub p: f64,
    pub seed: u64,
    pub range: (u32, u32),
    pub mode: &'static str,
}

pub fn write_scenario(scenario: &DelayScenario, header: Option<&ScenarioHeader>) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        let _ = writeln!(
            out,
            "scenario p={} seed={} range={}:{} mode={}",
            h.p, h.seed, h.range.0, h.range.1, h.mode
        );
    }
    for e in &scenario.entries {
        let _ = writeln!(out, "delay agent={} step={} duration={}", e.agent, e.step, e.duration);
    }
    out
}

// ------------------------------------------------------------------ maps

/// Reads a MovingAI grid: `.`, `G`, `S` are passable; `@`, `O`, `T`, `W`
/// are not.
pub fn read_map(text: &str) -> Result<GridMap, Failure> {
    let mut height = None;
    let mut width = None;
    let mut rows: Vec<Vec<bool>> = Vec::new();
    let mut in_grid = false;
    for (ln, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end())) {
        if !in_grid {
            let lower = line.trim().to_ascii_lowercase();
            if lower.starts_with("type") || lower.is_empty() {
                continue;
            } else if let Some(v) = lower.strip_prefix("height") {
                height = Some(v.trim().parse::<usize>().map_err(|_| bad(ln, "bad height"))?);
            } else if let Some(v) = lower.strip_prefix("width") {
                width = Some(v.trim().parse::<usize>().map_err(|_| bad(ln, "bad width"))?);
            } else if lower == "map" {
                in_grid = true;
            } else {
                return Err(bad(ln, format!("unexpected header line {line:?}")));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let row: Vec<bool> = line
            .chars()
            .map(|c| match c {
                '.' | 'G' | 'S' => Ok(true),
                '@' | 'O' | 'T' | 'W' => Ok(false),
                other => Err(bad(ln, format!("unknown terrain {other:?}"))),
            })
            .collect::<Result<_, _>>()?;
        rows.push(row);
    }
    let height = height.ok_or_else(|| Failure::Validation("map has no height".into()))?;
    let width = width.ok_or_else(|| Failure::Validation("map has no width".into()))?;
    if rows.len() != height || rows.iter().any(|r| r.len() != width) {
        return Err(Failure::Validation(format!(
            "grid is not the declared {width}x{height}"
        )));
    }
    Ok(GridMap::from_rows(rows))
}

pub fn write_map(rows: &[Vec<bool>]) -> String {
    let mut out = format!(
        "type octile\nheight {}\nwidth {}\nmap\n",
        rows.len(),
        rows.first().map_or(0, Vec::len)
    );
    for row in rows {
        out.extend(row.iter().map(|&p| if p { '.' } else { '@' }));
        out.push('\n');
    }
    out
}

// ------------------------------------------------------------------ TPGs

/// Human-readable dump of a built ordering graph: the route chains with
/// their edge costs, every ordering pair, and the undelayed execution cost.
pub fn write_tpg(tpg: &Tpg, plan: &MapfPlan, cost: i64) -> String {
    let g = tpg.as_stpg();
    let mut out = format!("tpg agents={} cost={cost}\n", g.agent_count());
    for a in 0..g.agent_count() as u32 {
        let chain = g.chain(a);
        let _ = write!(out, "chain {a}:");
        for &loc in &chain.locs {
            let _ = write!(out, " {}", plan.location_name(loc));
        }
        out.push('\n');
        let _ = write!(out, "costs {a}:");
        for &c in &chain.costs {
            let _ = write!(out, " {c}");
        }
        out.push('\n');
    }
    for (idx, p) in g.pairs().enumerate() {
        let _ = writeln!(
            out,
            "pair {idx}: later={}:{} earlier={}:{}",
            p.i_vertex.agent, p.i_vertex.step, p.j_vertex.agent, p.j_vertex.step
        );
    }
    out
}

// ---------------------------------------------------------------- groups

const GROUPS_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
pub struct GroupsFile {
    pub version: u32,
    pub plan_sha256: String,
    pub mode: String,
    pub pairs: Vec<GroupsEntry>,
}

/// Groups between one ordered agent pair; each group lists its members as
/// `(later visitor's step, earlier visitor's step)`.
#[derive(Serialize, Deserialize)]
pub struct GroupsEntry {
    pub from_agent: u32,
    pub to_agent: u32,
    pub groups: Vec<Vec<(u32, u32)>>,
}

pub fn write_groups(stpg: &Stpg, groups: &GroupSet, plan: &MapfPlan) -> String {
    assert_eq!(groups.mode, GroupingMode::Full, "only exact groupings are cached");
    let mut by_pair: Vec<GroupsEntry> = Vec::new();
    for group in &groups.groups {
        let steps: Vec<(u32, u32)> = group
            .members
            .iter()
            .map(|&k| {
                let p = stpg.pair(k);
                (p.i_vertex.step, p.j_vertex.step)
            })
            .collect();
        match by_pair
            .iter_mut()
            .find(|e| e.from_agent == group.from_agent && e.to_agent == group.to_agent)
        {
            Some(entry) => entry.groups.push(steps),
            None => by_pair.push(GroupsEntry {
                from_agent: group.from_agent,
                to_agent: group.to_agent,
                groups: vec![steps],
            }),
        }
    }
    by_pair.sort_by_key(|e| (e.from_agent, e.to_agent));
    let file = GroupsFile {
        version: GROUPS_VERSION,
        plan_sha256: plan_digest(plan),
        mode: "full".into(),
        pairs: by_pair,
    };
    serde_json::to_string_pretty(&file).expect("groups serialize") + "\n"
}

/// Parses a groups file and rebinds it to `stpg`'s pair indices, rejecting
/// version or plan-hash mismatches and files that don't cover the graph's
/// pairs exactly.
pub fn read_groups(text: &str, plan: &MapfPlan, stpg: &Stpg) -> Result<GroupSet, Failure> {
    let file: GroupsFile = serde_json::from_str(text)
        .map_err(|e| Failure::Validation(format!("bad groups file: {e}")))?;
    if file.version != GROUPS_VERSION {
        return Err(Failure::Validation(format!(
            "groups file version {} (expected {GROUPS_VERSION})",
            file.version
        )));
    }
    if file.plan_sha256 != plan_digest(plan) {
        return Err(Failure::Validation(
            "groups file was built from a different plan (hash mismatch)".into(),
        ));
    }
    if file.mode != "full" {
        return Err(Failure::Validation(format!("unsupported grouping mode {:?}", file.mode)));
    }
    let mut index: HashMap<(u32, u32, u32, u32), usize> = HashMap::new();
    for (k, p) in stpg.pairs().enumerate() {
        index.insert((p.j_vertex.agent, p.i_vertex.agent, p.i_vertex.step, p.j_vertex.step), k);
    }
    let mut groups = Vec::new();
    let mut pair_to_group = vec![usize::MAX; stpg.pair_count()];
    for entry in &file.pairs {
        for steps in &entry.groups {
            let id = groups.len();
            let mut members = Vec::with_capacity(steps.len());
            for &(i_step, j_step) in steps {
                let key = (entry.from_agent, entry.to_agent, i_step, j_step);
                let &k = index.get(&key).ok_or_else(|| {
                    Failure::Validation(format!(
                        "groups file lists a pair the plan does not have: \
                         agents {}->{} steps ({i_step},{j_step})",
                        entry.from_agent, entry.to_agent
                    ))
                })?;
                if pair_to_group[k] != usize::MAX {
                    return Err(Failure::Validation("groups file lists a pair twice".into()));
                }
                pair_to_group[k] = id;
                members.push(k);
            }
            members.sort_unstable();
            groups.push(EdgeGroup {
                id,
                from_agent: entry.from_agent,
                to_agent: entry.to_agent,
                members,
            });
        }
    }
    if pair_to_group.contains(&usize::MAX) {
        return Err(Failure::Validation("groups file does not cover every pair".into()));
    }
    Ok(GroupSet { mode: GroupingMode::Full, groups, pair_to_group })
}

// --------------------------------------------------------------- results

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct PhaseTimesFile {
    pub flpl: f64,
    pub blpl: f64,
    pub heuristic: f64,
    pub branch: f64,
    pub cycle: f64,
    pub other: f64,
}

/// One settled ordering decision: which visitor goes first at the end.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct SettledEdgeFile {
    pub pair: usize,
    pub later_agent: u32,
    pub later_step: u32,
    pub earlier_agent: u32,
    pub earlier_step: u32,
    pub direction: String,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct ConfigEcho {
    pub algorithm: String,
    pub grouping: String,
    pub branching: String,
    pub heuristic: String,
    pub lp: String,
    pub time_limit_s: Option<f64>,
    pub seed: u64,
    pub precomputed_groups: bool,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct ResultFile {
    pub cost: Option<i64>,
    pub outcome: String,
    pub expanded_nodes: u64,
    pub generated_nodes: u64,
    pub search_time_s: f64,
    pub phase_times: PhaseTimesFile,
    pub settled_edges: Vec<SettledEdgeFile>,
    pub config_echo: ConfigEcho,
}

/// Assembles the result JSON for a finished search on `input`.
pub fn result_file(input: &Stpg, result: &SearchResult, config_echo: ConfigEcho) -> ResultFile {
    let (cost, outcome, settled_edges) = match &result.outcome {
        Outcome::Optimal { tpg, cost } => {
            let solved = tpg.as_stpg();
            let settled = input
                .pairs()
                .enumerate()
                .filter(|&(k, _)| input.pair_state(k) == EdgeState::Switchable)
                .map(|(k, p)| SettledEdgeFile {
                    pair: k,
                    later_agent: p.i_vertex.agent,
                    later_step: p.i_vertex.step,
                    earlier_agent: p.j_vertex.agent,
                    earlier_step: p.j_vertex.step,
                    direction: match solved.pair_state(k) {
                        EdgeState::Fixed => "fix".into(),
                        EdgeState::Reversed => "reverse".into(),
                        EdgeState::Switchable => unreachable!("solutions are fully settled"),
                    },
                })
                .collect();
            (Some(*cost), "optimal".to_string(), settled)
        }
        Outcome::Timeout => (None, "timeout".to_string(), Vec::new()),
    };
    ResultFile {
        cost,
        outcome,
        expanded_nodes: result.expanded,
        generated_nodes: result.generated,
        search_time_s: result.elapsed.as_secs_f64(),
        phase_times: PhaseTimesFile {
            flpl: result.phases.flpl.as_secs_f64(),
            blpl: result.phases.blpl.as_secs_f64(),
            heuristic: result.phases.heuristic.as_secs_f64(),
            branch: result.phases.branch.as_secs_f64(),
            cycle: result.phases.cycle.as_secs_f64(),
            other: result.phases.other.as_secs_f64(),
        },
        settled_edges,
        config_echo,
    }
}

pub fn write_result(result: &ResultFile) -> String {
    serde_json::to_string_pretty(result).expect("result serialize") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plans_roundtrip_canonically() {
        let text = "# a comment\nagents 2\nagent 0: A G H\nagent 1: E F F F G C D\n";
        let plan = read_plan(text).unwrap();
        assert_eq!(plan.agent_count(), 2);
        let canonical = write_plan(&plan);
        assert_eq!(read_plan(&canonical).unwrap(), plan);
        assert!(canonical.starts_with("agents 2\nagent 0: A G H\n"));
    }

    #[test]
    fn plan_errors_name_the_line() {
        assert!(matches!(read_plan(""), Err(Failure::Validation(_))));
        let err = read_plan("agents 2\nagent 0: A\nagent 0: B\n").unwrap_err();
        assert!(err.message().contains("twice"), "{err}");
        let err = read_plan("agents 2\nagent 0: A\n").unwrap_err();
        assert!(err.message().contains("agent 1 missing"), "{err}");
        let err = read_plan("agents 1\nagent 3: A\n").unwrap_err();
        assert!(err.message().contains("out of range"), "{err}");
    }

    #[test]
    fn scenarios_roundtrip_and_tolerate_missing_headers() {
        let scenario = DelayScenario {
            entries: vec![
                DelayEntry { agent: 0, step: 0, duration: 2 },
                DelayEntry { agent: 3, step: 7, duration: 15 },
            ],
        };
        let header = ScenarioHeader { p: 0.01, seed: 9, range: (10, 20), mode: "first" };
        let text = write_scenario(&scenario, Some(&header));
        assert!(text.starts_with("scenario p=0.01 seed=9 range=10:20 mode=first\n"));
        assert_eq!(read_scenario(&text).unwrap(), scenario);
        // Headerless and empty files are fine; garbage is not.
        assert_eq!(read_scenario("delay agent=0 step=0 duration=2\n").unwrap().entries.len(), 1);
        assert_eq!(read_scenario("").unwrap().entries.len(), 0);
        assert!(read_scenario("delay agent=0 step=1\n").is_err());
        assert!(read_scenario("wait what\n").is_err());
    }

    #[test]
    fn maps_roundtrip_through_the_grid_format() {
        let rows = vec![vec![true, true, false], vec![false, true, true]];
        let text = write_map(&rows);
        let map = read_map(&text).unwrap();
        assert!(map.is_passable(0, 0) && !map.is_passable(0, 2) && map.is_passable(1, 2));
        assert!(read_map("type octile\nheight 2\nwidth 2\nmap\n..\n").is_err()); // short grid
        assert!(read_map("height 1\nwidth 1\nmap\nX\n").is_err()); // unknown terrain
    }

    #[test]
    fn group_files_reject_tampering() {
        let plan = read_plan("agents 2\nagent 0: A G H\nagent 1: E F F F G C D\n").unwrap();
        let tpg = stpg_core::build_tpg(&plan).unwrap();
        let stpg = stpg_core::to_stpg(&tpg);
        let groups = GroupSet::compute(&stpg, GroupingMode::Full);
        let text = write_groups(&stpg, &groups, &plan);
        let loaded = read_groups(&text, &plan, &stpg).unwrap();
        assert_eq!(loaded.pair_to_group, groups.pair_to_group);

        let other = read_plan("agents 2\nagent 0: A G H\nagent 1: E F F F F G C D\n").unwrap();
        let err = read_groups(&text, &other, &stpg_core::to_stpg(&stpg_core::build_tpg(&other).unwrap()));
        assert!(err.unwrap_err().message().contains("hash mismatch"));

        let bumped = text.replace("\"version\": 1", "\"version\": 2");
        assert!(read_groups(&bumped, &plan, &stpg).unwrap_err().message().contains("version"));
    }
}
