//! Potential-field planner: a fixed-horizon gradient-descent rollout of an
//! attractive goal potential plus repulsive potentials around predicted
//! agents and occupied cells. Deliberately simple — it has the classic
//! failure modes (freezing in traps, stalling against symmetric pressure)
//! that the tree-search planner is designed to avoid.

use super::cost::{cv_predict, predictions_at, CostParams};
use super::{segment_is_free, Plan, PlanStep, RobotState};
use crate::geom::{Point2, Rect, Vector2};
use crate::perception::OccupancyGrid;

/// Attractive gain: pulls toward the goal with gradient k_a·(G − R).
pub const PF_K_ATTRACT: f64 = 1.0;
/// Repulsive gain on the (1/ρ − 1/d)² barrier inside the interaction radius.
pub const PF_K_REPEL: f64 = 2.0;
/// Speed clamp on each rollout step (m/s).
pub const PF_MAX_SPEED: f64 = 0.9;
/// Gradient magnitude below which the rollout is considered trapped.
const ZERO_GRADIENT_EPS: f64 = 1e-6;

/// Negative gradient of the combined potential at `pos`.
fn descent_direction(pos: Point2, goal: Point2, repulsors: &[Point2], d: f64) -> Vector2 {
    let mut v = (goal - pos) * PF_K_ATTRACT;
    for &x in repulsors {
        let away = pos - x;
        let rho = away.norm();
        if rho >= d || rho < 1e-9 {
            continue; // outside influence, or direction undefined
        }
        v += away * (PF_K_REPEL * (1.0 / rho - 1.0 / d) / (rho * rho) / rho);
    }
    v
}

/// Plan toward `goal` by rolling the gradient flow forward `horizon` steps.
///
/// The robot is holonomic: each step moves along the clamped negative
/// gradient and the pose heading follows the motion. A vanishing gradient
/// (local trap) or a step that would enter an occupied cell or leave the
/// bounds freezes the remainder of the plan in place.
pub fn pf_plan(
    root: &RobotState,
    goal: Point2,
    tracks: &[(Point2, Vector2)],
    occupancy: &OccupancyGrid,
    bounds: Option<&Rect>,
    params: &CostParams,
) -> Plan {
    let horizon = params.horizon;
    let predictions = cv_predict(tracks, horizon, params);
    let statics = occupancy.occupied_centres();

    let mut steps: Vec<PlanStep> = Vec::with_capacity(horizon);
    let mut pos = root.position;
    let mut heading = root.heading;
    let mut frozen = false;
    for k in 1..=horizon {
        let time = root.time + k as f64 * params.dt;
        let mut step_speed = 0.0;
        if !frozen {
            let mut repulsors: Vec<Point2> =
                predictions_at(&predictions, k).iter().map(|&(p, _)| p).collect();
            repulsors.extend_from_slice(&statics);
            let mut v = descent_direction(pos, goal, &repulsors, params.interaction_radius);
            let magnitude = v.norm();
            if magnitude < ZERO_GRADIENT_EPS {
                frozen = true; // zero-gradient trap: hold position
            } else {
                if magnitude > PF_MAX_SPEED {
                    v *= PF_MAX_SPEED / magnitude;
                }
                let next = pos + v * params.dt;
                if segment_is_free(pos, next, occupancy, bounds) {
                    pos = next;
                    heading = v.y.atan2(v.x);
                    step_speed = v.norm();
                } else {
                    frozen = true; // stepping further would collide
                }
            }
        }
        steps.push(PlanStep {
            position: pos,
            heading,
            speed: step_speed,
            time,
        });
    }
    Plan { steps }
}
