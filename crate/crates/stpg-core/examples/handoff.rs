//! Re-optimizes the passing order of a two-agent handoff after a delay.
//!
//! Agent 0 cuts through the shared cell G first in the original plan; once it
//! is held at its start for two steps, letting agent 1 go first is cheaper.

use stpg_core::{
    apply_delays, build_tpg, optimize, to_stpg, DelayEntry, DelayScenario, MapfPlan, Outcome,
    SearchConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let plan = MapfPlan::from_named_paths(vec![
        vec!["A", "G", "H"].into_iter().map(String::from).collect(),
        vec!["E", "F", "F", "F", "G", "C", "D"].into_iter().map(String::from).collect(),
    ]);
    let tpg = build_tpg(&plan)?; // validates 1-robustness
    let scenario =
        DelayScenario { entries: vec![DelayEntry { agent: 0, step: 0, duration: 2 }] };
    let stpg = to_stpg(&apply_delays(&tpg, &scenario)?); // open the switchable pairs

    let result = optimize(&stpg, &SearchConfig::igses())?;
    if let Outcome::Optimal { tpg: _solved, cost } = result.outcome {
        println!("minimum total arrival time: {cost}"); // 9: the order flips
    }
    Ok(())
}
