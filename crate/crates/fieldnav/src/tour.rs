//! Goal ordering: precedence constraints and the asymmetric
//! travelling-salesman solve over the condensed goal graph.
//!
//! The mission visits every goal exactly once, starting at the first goal
//! and finishing at the last. That path problem is turned into a cycle
//! problem by a precedence transform (all arcs into the start become
//! forbidden except a zero-cost return from the end), solved exactly by
//! dynamic programming over subsets for up to twelve goals and by nearest
//! neighbour + 2-opt beyond, then unrolled back into a path by dropping the
//! zero return arc.

use thiserror::Error;

/// Condensed goal-to-goal graph: pairwise minimum costs, the reference
/// polylines realising them, and the goal positions themselves.
#[derive(Debug, Clone)]
pub struct GoalGraph {
    /// `cost[i][j]` = minimum energy (J) from goal i to goal j
    /// (`f64::INFINITY` where forbidden or absent, 0 on the diagonal).
    pub cost: Vec<Vec<f64>>,
    /// `paths[i][j]` = 3D polyline realising `cost[i][j]` (empty on the
    /// diagonal and where no path exists).
    pub paths: Vec<Vec<Vec<[f64; 3]>>>,
    /// Goal positions, indexable by goal.
    pub positions: Vec<[f64; 3]>,
}

impl GoalGraph {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Errors from tour construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TourError {
    /// No finite-cost ordering visits every goal.
    #[error("no finite-cost path visits every goal once")]
    NoHamiltonianPath,
}

/// The solved visiting order with its reference geometry.
#[derive(Debug, Clone)]
pub struct Tour {
    /// Goal indices in visiting order; starts at the start goal and ends at
    /// the end goal.
    pub order: Vec<usize>,
    /// Concatenated reference polyline through all goals (3D points).
    pub polyline: Vec<[f64; 3]>,
    /// Cumulative XY arc length at which each goal (in `order`) sits on the
    /// polyline.
    pub goal_s: Vec<f64>,
    /// Total energy cost (J) of the ordering.
    pub total_cost: f64,
}

/// Forbid orderings that re-enter the start or leave the end mid-tour:
/// every arc into `start` becomes infinite except a zero-cost arc from
/// `end`, and every arc out of `end` becomes infinite except that same
/// return arc. Skipped entirely when `start == end`.
pub fn apply_precedence(graph: &mut GoalGraph, start: usize, end: usize) {
    if start == end {
        return;
    }
    let n = graph.len();
    for i in 0..n {
        if i != end && i != start {
            graph.cost[i][start] = f64::INFINITY;
        }
    }
    for j in 0..n {
        if j != start && j != end {
            graph.cost[end][j] = f64::INFINITY;
        }
    }
    graph.cost[end][start] = 0.0;
}

/// Exact minimum-cost Hamiltonian path from `start` to `end` by dynamic
/// programming over vertex subsets (Held–Karp). Exponential in the number of
/// goals; intended for n ≤ 12.
///
/// Expects the precedence transform to have been applied (the path is found
/// as a cycle through the zero return arc). Returns the visiting order and
/// its cost, or `None` if no finite ordering exists.
pub fn held_karp_order(cost: &[Vec<f64>], start: usize, end: usize) -> Option<(Vec<usize>, f64)> {
    let n = cost.len();
    if n == 1 {
        return Some((vec![start], 0.0));
    }
    let others: Vec<usize> = (0..n).filter(|&v| v != start).collect();
    let m = others.len();
    let full = 1usize << m;
    let mut dp = vec![vec![f64::INFINITY; m]; full];
    let mut parent = vec![vec![usize::MAX; m]; full];
    for (ji, &j) in others.iter().enumerate() {
        dp[1 << ji][ji] = cost[start][j];
    }
    for mask in 1..full {
        for ji in 0..m {
            if mask & (1 << ji) == 0 {
                continue;
            }
            let base = dp[mask][ji];
            if !base.is_finite() {
                continue;
            }
            for ki in 0..m {
                if mask & (1 << ki) != 0 {
                    continue;
                }
                let cand = base + cost[others[ji]][others[ki]];
                let next = mask | (1 << ki);
                if cand < dp[next][ki] {
                    dp[next][ki] = cand;
                    parent[next][ki] = ji;
                }
            }
        }
    }
    // Close the cycle through the return arc to the start.
    let mut best: Option<(usize, f64)> = None;
    for ji in 0..m {
        let total = dp[full - 1][ji] + cost[others[ji]][start];
        if total.is_finite() && best.map_or(true, |(_, b)| total < b) {
            best = Some((ji, total));
        }
    }
    let (mut ji, total) = best?;
    let mut order = Vec::with_capacity(n);
    let mut mask = full - 1;
    while ji != usize::MAX {
        order.push(others[ji]);
        let prev = parent[mask][ji];
        mask &= !(1 << ji);
        ji = prev;
    }
    order.push(start);
    order.reverse();
    if *order.last().unwrap() != end {
        // With precedence applied the only finite return arc is end→start,
        // so this cannot happen unless precedence was skipped.
        return None;
    }
    Some((order, total))
}

/// Heuristic Hamiltonian path from `start` to `end`: nearest-neighbour
/// construction over the interior goals followed by 2-opt segment reversals
/// until no move improves the cost. Used above the exact solver's size
/// limit.
pub fn nn_two_opt_order(cost: &[Vec<f64>], start: usize, end: usize) -> Option<(Vec<usize>, f64)> {
    let n = cost.len();
    if n == 1 {
        return Some((vec![start], 0.0));
    }
    let path_cost = |order: &[usize]| -> f64 {
        order
            .windows(2)
            .map(|w| cost[w[0]][w[1]])
            .sum()
    };

    // Nearest neighbour over the interior, then the forced end.
    let mut remaining: Vec<usize> = (0..n).filter(|&v| v != start && v != end).collect();
    let mut order = vec![start];
    let mut current = start;
    while !remaining.is_empty() {
        let (pos, _) = remaining
            .iter()
            .enumerate()
            .min_by(|a, b| cost[current][*a.1].total_cmp(&cost[current][*b.1]))
            .unwrap();
        current = remaining.remove(pos);
        order.push(current);
    }
    order.push(end);

    // 2-opt: reverse interior segments while any reversal improves.
    let mut best = path_cost(&order);
    let mut improved = true;
    while improved {
        improved = false;
        for i in 1..n - 1 {
            for j in i + 1..n - 1 {
                order[i..=j].reverse();
                let cand = path_cost(&order);
                if cand + 1e-12 < best {
                    best = cand;
                    improved = true;
                } else {
                    order[i..=j].reverse();
                }
            }
        }
    }
    best.is_finite().then_some((order, best))
}

/// Number of goals up to which the exact subset-DP solver is used.
pub const EXACT_SOLVER_LIMIT: usize = 12;

/// Solve the goal ordering on a precedence-applied graph and assemble the
/// reference geometry.
pub fn solve_tour(graph: &GoalGraph, start: usize, end: usize) -> Result<Tour, TourError> {
    let n = graph.len();
    let solved = if n <= EXACT_SOLVER_LIMIT {
        held_karp_order(&graph.cost, start, end)
    } else {
        nn_two_opt_order(&graph.cost, start, end)
    };
    let (order, total_cost) = solved.ok_or(TourError::NoHamiltonianPath)?;
    Ok(assemble_tour(graph, &order, total_cost))
}

/// Concatenate the stored leg polylines for a visiting order and locate each
/// goal's cumulative XY arc length along the result.
fn assemble_tour(graph: &GoalGraph, order: &[usize], total_cost: f64) -> Tour {
    let mut polyline: Vec<[f64; 3]> = Vec::new();
    let mut goal_s = Vec::with_capacity(order.len());
    let mut s = 0.0;
    polyline.push(graph.positions[order[0]]);
    goal_s.push(0.0);
    for pair in order.windows(2) {
        let leg = &graph.paths[pair[0]][pair[1]];
        for p in leg {
            let last = *polyline.last().unwrap();
            let step = (p[0] - last[0]).hypot(p[1] - last[1]);
            if step < 1e-9 {
                continue;
            }
            s += step;
            polyline.push(*p);
        }
        goal_s.push(s);
    }
    Tour {
        order: order.to_vec(),
        polyline,
        goal_s,
        total_cost,
    }
}
