//! Hand-sized graphs shared by the unit tests, with their key quantities
//! worked out by hand in the tests that use them.

use crate::graph::{AgentChain, EdgeState, Stpg, Type2Pair, VertexId};

/// Two agents meeting at one shared cell: agent 0 crosses it early on a
/// short route, agent 1 late on a long one. `delayed` stretches agent 0's
/// first move from 1 to 3, making it worth letting agent 1 pass first
/// (cost 9 reversed vs 11 as planned; 8 with the order still open).
pub(crate) fn handoff(delayed: bool) -> Stpg {
    let a0 = AgentChain { locs: vec![0, 1, 2], costs: vec![if delayed { 3 } else { 1 }, 1] };
    let a1 = AgentChain::unit(vec![3, 4, 1, 5, 6]);
    let pair = Type2Pair {
        i_vertex: VertexId::new(1, 2),
        j_vertex: VertexId::new(0, 1),
        state: EdgeState::Switchable,
    };
    Stpg::from_parts(vec![a0, a1], vec![pair]).unwrap()
}

/// Two agents through a three-cell corridor; `reversed` sends the second
/// agent through it backwards (crossing) instead of behind (parallel).
/// Agent 1 is the later visitor of every shared cell, so the subgraph edges
/// are (2,1),(3,2),(4,3) parallel and (2,3),(3,2),(4,1) crossing.
pub(crate) fn corridor(reversed: bool) -> Stpg {
    let second = if reversed { vec![5, 3, 2, 1, 6] } else { vec![5, 1, 2, 3, 6] };
    let mut pairs = Vec::new();
    for cell in [1u32, 2, 3] {
        let q = second.iter().position(|&l| l == cell).unwrap() as u32;
        pairs.push(Type2Pair {
            i_vertex: VertexId::new(1, q),
            j_vertex: VertexId::new(0, cell), // chain [0,1,2,3,4]: cell k at step k
            state: EdgeState::Switchable,
        });
    }
    let a0 = AgentChain::unit(vec![0, 1, 2, 3, 4]);
    Stpg::from_parts(vec![a0, AgentChain::unit(second)], pairs).unwrap()
}

/// Two far-apart shared cells whose ordering decisions are independent:
/// subgraph edges (2,1) and (4,3), which no sound grouping may merge.
pub(crate) fn distant_cells() -> Stpg {
    let a0 = AgentChain::unit(vec![0, 1, 2, 3, 4]);
    let a1 = AgentChain::unit(vec![5, 1, 6, 3, 7]);
    let pairs = [1u32, 3]
        .into_iter()
        .map(|cell| Type2Pair {
            i_vertex: VertexId::new(1, cell),
            j_vertex: VertexId::new(0, cell),
            state: EdgeState::Switchable,
        })
        .collect();
    Stpg::from_parts(vec![a0, a1], pairs).unwrap()
}
