//! Online local planners sharing one interface: an anytime tree-search
//! planner with pluggable constant-velocity prediction, a potential-field
//! planner, and the geometric fail-safe stop check.
//!
//! All planners emit the same [`Plan`] format: a fixed-horizon sequence of
//! timed poses at the 0.2 s planning tick, moving only forward, with every
//! step kept off dilated-occupied cells.

pub mod cost;
pub mod failsafe;
pub mod mcts;
pub mod potential;

pub use cost::{cv_predict, evaluate_state, CostParams, PredictedAgent};
pub use failsafe::fs_check;
pub use mcts::mcts_plan;
pub use potential::pf_plan;

use crate::geom::{wrap_angle, Point2, Rect, Vector2};
use crate::perception::OccupancyGrid;

/// Planner selection, as named in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlannerKind {
    Mcts,
    PotentialField,
    FailSafe,
}

impl PlannerKind {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "mcts" => Some(Self::Mcts),
            "pf" => Some(Self::PotentialField),
            "fs" => Some(Self::FailSafe),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Mcts => "mcts",
            Self::PotentialField => "pf",
            Self::FailSafe => "fs",
        }
    }
}

/// Instantaneous robot state used as a planning root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub position: Point2,
    pub heading: f64,
    pub speed: f64,
    pub time: f64,
}

/// One discrete planner action: set a relative heading and hold a speed for
/// one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub speed: f64,
    pub dheading: f64,
}

/// Commanded speeds (m/s); includes the stop action's zero.
pub const ACTION_SPEEDS: [f64; 4] = [0.0, 0.3, 0.6, 0.9];

/// Relative headings (deg) available each step; turning is limited to this
/// span per tick so the robot only ever advances into its forward sector.
pub const ACTION_DHEADINGS_DEG: [f64; 9] =
    [0.0, -15.0, 15.0, -30.0, 30.0, -45.0, 45.0, -60.0, 60.0];

/// The full discrete action set, stop action first.
pub fn action_space() -> Vec<Action> {
    custom_action_space(&ACTION_SPEEDS, &ACTION_DHEADINGS_DEG)
}

/// The cross product of arbitrary speed and heading-change (degrees) sets,
/// in the same order as [`action_space`].
pub fn custom_action_space(speeds: &[f64], dheadings_deg: &[f64]) -> Vec<Action> {
    let mut actions = Vec::with_capacity(speeds.len() * dheadings_deg.len());
    for &speed in speeds {
        for &deg in dheadings_deg {
            actions.push(Action {
                speed,
                dheading: deg.to_radians(),
            });
        }
    }
    actions
}

impl RobotState {
    /// Kinematic effect of holding `action` for `dt`: turn, then advance
    /// along the new heading.
    pub fn apply(&self, action: Action, dt: f64) -> RobotState {
        let heading = wrap_angle(self.heading + action.dheading);
        let position =
            self.position + Vector2::new(heading.cos(), heading.sin()) * (action.speed * dt);
        RobotState {
            position,
            heading,
            speed: action.speed,
            time: self.time + dt,
        }
    }
}

/// One timed pose of a plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanStep {
    pub position: Point2,
    pub heading: f64,
    pub speed: f64,
    pub time: f64,
}

/// A fixed-horizon sequence of future poses (the root pose is not
/// included), one per planning tick.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
}

impl Plan {
    /// Stationary plan: hold the root pose at zero speed for the horizon.
    pub fn stop(root: &RobotState, horizon: usize, dt: f64) -> Self {
        let steps = (1..=horizon)
            .map(|k| PlanStep {
                position: root.position,
                heading: root.heading,
                speed: 0.0,
                time: root.time + k as f64 * dt,
            })
            .collect();
        Self { steps }
    }

    /// Whether every step is at zero speed.
    pub fn is_stationary(&self) -> bool {
        self.steps.iter().all(|s| s.speed == 0.0)
    }
}

/// Whether moving from `from` to `to` stays on free cells and inside the
/// world bounds. Steps are shorter than a cell, so endpoint and midpoint
/// checks cover the swept segment; the grid is already dilated by the robot
/// radius, so point tests stand in for the robot disc.
pub fn segment_is_free(
    from: Point2,
    to: Point2,
    occupancy: &OccupancyGrid,
    bounds: Option<&Rect>,
) -> bool {
    let mid = Point2::new((from.x + to.x) / 2.0, (from.y + to.y) / 2.0);
    for p in [from, mid, to] {
        if occupancy.is_occupied_at(p) {
            return false;
        }
        if let Some(b) = bounds {
            if !b.contains(p) {
                return false;
            }
        }
    }
    true
}
