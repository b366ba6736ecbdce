//! Plan supply for the benchmark harness: random grid maps and a greedy
//! prioritized planner. Each agent in turn runs space-time A* against the
//! reservations of everyone planned before it, with a one-step safety
//! margin (no entering a cell its occupant held the previous step), so the
//! produced plans pass the library's vertex/following validation.

use rand::seq::SliceRandom;
use rand::Rng;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use stpg_core::{validate_plan, GridMap, MapfPlan};

/// A generated map kept as rows so it can be rendered back to a file.
#[derive(Debug, Clone)]
pub struct GeneratedMap {
    pub rows: Vec<Vec<bool>>,
}

impl GeneratedMap {
    pub fn grid_map(&self) -> GridMap {
        GridMap::from_rows(self.rows.clone())
    }

    fn passable_cells(&self) -> Vec<(usize, usize)> {
        let mut cells = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            for (c, &p) in row.iter().enumerate() {
                if p {
                    cells.push((r, c));
                }
            }
        }
        cells
    }
}

/// Square map with independently blocked cells.
pub fn random_map(rng: &mut impl Rng, size: usize, obstacle_density: f64) -> GeneratedMap {
    let rows = (0..size)
        .map(|_| (0..size).map(|_| rng.gen::<f64>() >= obstacle_density).collect())
        .collect();
    GeneratedMap { rows }
}

fn cell_name(cell: (usize, usize)) -> String {
    format!("({},{})", cell.0, cell.1)
}

struct Reservations {
    /// Timed occupancy of every planned path, including each agent's final
    /// cell at its arrival step.
    busy: HashSet<(usize, usize, usize)>,
    /// Cell -> the step from which an agent parks there forever.
    parked: HashMap<(usize, usize), usize>,
    /// Cell -> last step any moving reservation touches it.
    last_busy: HashMap<(usize, usize), usize>,
}

impl Reservations {
    fn new() -> Self {
        Reservations { busy: HashSet::new(), parked: HashMap::new(), last_busy: HashMap::new() }
    }

    fn occupied(&self, cell: (usize, usize), t: usize) -> bool {
        self.busy.contains(&(cell.0, cell.1, t))
            || self.parked.get(&cell).is_some_and(|&from| t >= from)
    }

    /// A cell is free to park on from `t` if no reservation ever touches it
    /// at or after `t`.
    fn free_forever(&self, cell: (usize, usize), t: usize) -> bool {
        self.last_busy.get(&cell).is_none_or(|&last| last < t)
            && !self.parked.contains_key(&cell)
    }

    fn commit(&mut self, path: &[(usize, usize)]) {
        for (t, &cell) in path.iter().enumerate() {
            self.busy.insert((cell.0, cell.1, t));
            let slot = self.last_busy.entry(cell).or_insert(t);
            *slot = (*slot).max(t);
        }
        self.parked.insert(*path.last().unwrap(), path.len() - 1);
    }
}

/// Space-time A* from `start` to `goal`, waiting allowed, entering a cell
/// forbidden while it is occupied or was occupied the step before. The goal
/// must stay conflict-free forever after arrival (the agent parks on it).
fn route(
    map: &GeneratedMap,
    res: &Reservations,
    blocked: &HashSet<(usize, usize)>,
    start: (usize, usize),
    goal: (usize, usize),
    horizon: usize,
) -> Option<Vec<(usize, usize)>> {
    let size = map.rows.len();
    let manhattan =
        |c: (usize, usize)| c.0.abs_diff(goal.0) + c.1.abs_diff(goal.1);
    let mut open: BinaryHeap<Reverse<(usize, usize, usize, usize)>> = BinaryHeap::new();
    let mut came: HashMap<((usize, usize), usize), ((usize, usize), usize)> = HashMap::new();
    let mut seen: HashSet<((usize, usize), usize)> = HashSet::new();
    // Standing on the start at t=0 must not collide with anyone there now
    // or arriving next step.
    if res.occupied(start, 0) || res.occupied(start, 1) || blocked.contains(&start) {
        return None;
    }
    open.push(Reverse((manhattan(start), 0, start.0, start.1)));
    seen.insert((start, 0));
    while let Some(Reverse((_, t, r, c))) = open.pop() {
        let here = (r, c);
        if here == goal && res.free_forever(goal, t) {
            let mut path = vec![here];
            let mut cursor = (here, t);
            while let Some(&prev) = came.get(&cursor) {
                path.push(prev.0);
                cursor = prev;
            }
            path.reverse();
            return Some(path);
        }
        if t + 1 > horizon {
            continue;
        }
        let mut neighbors = vec![(r, c)];
        if r > 0 {
            neighbors.push((r - 1, c));
        }
        if c > 0 {
            neighbors.push((r, c - 1));
        }
        if r + 1 < size {
            neighbors.push((r + 1, c));
        }
        if c + 1 < size {
            neighbors.push((r, c + 1));
        }
        for next in neighbors {
            if !map.rows[next.0][next.1] || blocked.contains(&next) || seen.contains(&(next, t + 1))
            {
                continue;
            }
            // Vertex conflict now, following its occupant of a step ago, or
            // being followed by whoever arrives a step later.
            if res.occupied(next, t + 1)
                || (next != here && res.occupied(next, t))
                || res.occupied(next, t + 2)
            {
                continue;
            }
            seen.insert((next, t + 1));
            came.insert((next, t + 1), (here, t));
            open.push(Reverse((t + 1 + manhattan(next), t + 1, next.0, next.1)));
        }
    }
    None
}

/// Plans `agents` conflict-free routes on `map`, retrying with fresh
/// starts and goals until a full plan validates. Returns the plan or None
/// if the map is too cramped after `tries` attempts.
pub fn plan_on_map(
    rng: &mut impl Rng,
    map: &GeneratedMap,
    agents: usize,
    tries: usize,
) -> Option<MapfPlan> {
    let cells = map.passable_cells();
    if cells.len() < agents * 2 {
        return None;
    }
    let size = map.rows.len();
    'attempt: for _ in 0..tries {
        let mut pool = cells.clone();
        pool.shuffle(rng);
        let starts: Vec<(usize, usize)> = pool[..agents].to_vec();
        let goals: Vec<(usize, usize)> = pool[agents..agents * 2].to_vec();
        let mut res = Reservations::new();
        let mut paths: Vec<Vec<(usize, usize)>> = Vec::with_capacity(agents);
        for k in 0..agents {
            // Agents not yet planned sit on their starts indefinitely from
            // this agent's point of view; treat those cells as walls.
            let blocked: HashSet<(usize, usize)> = starts[k + 1..].iter().copied().collect();
            let horizon = res.last_busy.values().copied().max().unwrap_or(0) + size * size;
            match route(map, &res, &blocked, starts[k], goals[k], horizon) {
                Some(path) => {
                    res.commit(&path);
                    paths.push(path);
                }
                None => continue 'attempt,
            }
        }
        let plan = MapfPlan::from_named_paths(
            paths.iter().map(|p| p.iter().map(|&c| cell_name(c)).collect()).collect(),
        );
        if validate_plan(&plan, Some(&map.grid_map())).is_ok() {
            return Some(plan);
        }
    }
    None
}
