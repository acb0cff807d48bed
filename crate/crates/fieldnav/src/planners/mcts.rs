//! Anytime tree search over the discrete action space with single-step
//! simulation: each iteration selects the K most promising expandable nodes
//! by UCB1, expands one untried valid action from each, scores the new state
//! against the time-synchronized constant-velocity predictions, and backs
//! the reward up the path. The best plan (deepest, then cheapest) is always
//! available, so any budget yields a usable result.

use super::cost::{cv_predict, evaluate_state, predictions_at, CostParams, PredictedAgent};
use super::{segment_is_free, Action, Plan, PlanStep, RobotState};
use crate::geom::{Point2, Rect, Vector2};
use crate::perception::OccupancyGrid;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

struct Node {
    state: RobotState,
    depth: usize,
    parent: Option<usize>,
    /// Valid actions not yet expanded; popped from the back.
    untried: Vec<Action>,
    visits: u32,
    value_sum: f64,
    /// Sum of per-step costs along the path from the root.
    cum_cost: f64,
}

impl Node {
    fn mean(&self) -> f64 {
        self.value_sum / self.visits as f64
    }
}

/// Valid actions from a state: the swept step must stay off occupied cells
/// and inside the world bounds.
fn valid_actions(
    state: &RobotState,
    actions: &[Action],
    occupancy: &OccupancyGrid,
    bounds: Option<&Rect>,
    dt: f64,
) -> Vec<Action> {
    actions
        .iter()
        .copied()
        .filter(|&a| {
            let next = state.apply(a, dt);
            segment_is_free(state.position, next.position, occupancy, bounds)
        })
        .collect()
}

/// Plan toward `goal` from `root` within the iteration budget.
///
/// Returns the stop plan when the root itself is in collision or when every
/// moving action at the root is blocked.
#[allow(clippy::too_many_arguments)]
pub fn mcts_plan(
    root: &RobotState,
    goal: Point2,
    tracks: &[(Point2, Vector2)],
    occupancy: &OccupancyGrid,
    bounds: Option<&Rect>,
    actions: &[Action],
    params: &CostParams,
    rng: &mut ChaCha8Rng,
) -> Plan {
    let horizon = params.horizon;
    if occupancy.is_occupied_at(root.position) {
        return Plan::stop(root, horizon, params.dt);
    }
    let root_actions = valid_actions(root, actions, occupancy, bounds, params.dt);
    if !root_actions.iter().any(|a| a.speed > 0.0) {
        return Plan::stop(root, horizon, params.dt);
    }

    let predictions: Vec<PredictedAgent> = cv_predict(tracks, horizon, params);
    // Reward scale: the root's unobstructed goal cost, so values are O(1).
    let cost0 = (root.position - goal).norm_squared().max(1e-6);

    let mut nodes = vec![Node {
        state: *root,
        depth: 0,
        parent: None,
        untried: root_actions,
        visits: 1,
        value_sum: 0.0,
        cum_cost: 0.0,
    }];
    let mut best = 0usize; // deepest node, ties broken by lower cum_cost

    for _ in 0..params.budget_iters {
        // Rank expandable nodes by UCB1 on the negated, normalized cost.
        let mut scored: Vec<(f64, usize)> = nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| !n.untried.is_empty() && n.depth < horizon)
            .map(|(idx, n)| {
                let parent_visits = match n.parent {
                    Some(p) => nodes[p].visits,
                    None => n.visits,
                };
                let explore =
                    params.ucb_c * ((parent_visits as f64).ln() / n.visits as f64).sqrt();
                (n.mean() + explore, idx)
            })
            .collect();
        if scored.is_empty() {
            break;
        }
        let k = params.select_k.min(scored.len());
        scored.select_nth_unstable_by(k - 1, |a, b| {
            b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
        });
        let mut selected: Vec<(f64, usize)> = scored[..k].to_vec();
        selected.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

        for &(_, leaf) in &selected {
            let Some(action) = nodes[leaf].untried.pop() else {
                continue;
            };
            let state = nodes[leaf].state.apply(action, params.dt);
            let depth = nodes[leaf].depth + 1;
            let agents = predictions_at(&predictions, depth);
            let cost = evaluate_state(state.position, goal, &agents, params);
            let cum_cost = nodes[leaf].cum_cost + cost;
            let mut untried = if depth < horizon {
                valid_actions(&state, actions, occupancy, bounds, params.dt)
            } else {
                Vec::new()
            };
            untried.shuffle(rng);
            let idx = nodes.len();
            nodes.push(Node {
                state,
                depth,
                parent: Some(leaf),
                untried,
                visits: 0,
                value_sum: 0.0,
                cum_cost,
            });

            // Single-step simulation: the new node's own normalized reward.
            let reward = -cost / cost0;
            let mut at = Some(idx);
            while let Some(i) = at {
                nodes[i].visits += 1;
                nodes[i].value_sum += reward;
                at = nodes[i].parent;
            }

            let better = depth > nodes[best].depth
                || (depth == nodes[best].depth && cum_cost < nodes[best].cum_cost);
            if better {
                best = idx;
            }
        }
    }

    // Extract the pose chain root→best and pad to the horizon by stopping.
    let mut chain = Vec::new();
    let mut at = Some(best);
    while let Some(i) = at {
        if i != 0 {
            chain.push(i);
        }
        at = nodes[i].parent;
    }
    chain.reverse();
    let mut steps: Vec<PlanStep> = chain
        .iter()
        .map(|&i| {
            let s = nodes[i].state;
            PlanStep {
                position: s.position,
                heading: s.heading,
                speed: s.speed,
                time: s.time,
            }
        })
        .collect();
    while steps.len() < horizon {
        let last = steps.last().copied().unwrap_or(PlanStep {
            position: root.position,
            heading: root.heading,
            speed: 0.0,
            time: root.time,
        });
        steps.push(PlanStep {
            position: last.position,
            heading: last.heading,
            speed: 0.0,
            time: last.time + params.dt,
        });
    }
    Plan { steps }
}
