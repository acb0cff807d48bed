//! Hierarchical mode switcher and reference tracking: picks between
//! long-term path tracking, the latched dynamic planning mode, and the
//! fail-safe stop; owns the planning-delay slow-down, the moving local goal
//! on the reference path, pure-pursuit velocity commands, and waypoint
//! arrival/dwell bookkeeping.

use crate::geom::{wrap_angle, Point2, Vector2};
use crate::planners::RobotState;
use crate::tour::Tour;

/// Forward semicircle radius of the dynamic-area test (m).
pub const DYN_SEMICIRCLE_RADIUS_M: f64 = 4.0;
/// Half-angle of the dynamic-area forward sector (135° subtended).
pub const DYN_SECTOR_HALF_ANGLE: f64 = 67.5 * std::f64::consts::PI / 180.0;
/// Framework radius: agents farther than this are ignored by mode selection.
pub const FRAMEWORK_RADIUS_M: f64 = 8.0;

/// Executive tuning; the defaults are the values used by the simulation.
#[derive(Debug, Clone, Copy)]
pub struct ExecutiveParams {
    /// Linear speed cap (m/s).
    pub v_max: f64,
    /// Angular rate cap (rad/s).
    pub omega_max: f64,
    /// P gain from positional error to linear velocity (1/s).
    pub pos_gain: f64,
    /// P gain from heading error to angular rate (1/s).
    pub heading_gain: f64,
    /// Lookahead distance when tracking a path (m).
    pub lookahead: f64,
    /// Dynamic-mode latch duration (s).
    pub latch_s: f64,
    /// Planning delay compensated by the slow-down (s).
    pub delay_s: f64,
    /// Dwell duration at each reached waypoint (s).
    pub dwell_s: f64,
    /// Distance of the moving local goal ahead of the robot (m).
    pub local_goal_dist: f64,
}

impl Default for ExecutiveParams {
    fn default() -> Self {
        Self {
            v_max: 1.0,
            omega_max: 1.0,
            pos_gain: 1.0,
            heading_gain: 2.0,
            lookahead: 2.0,
            latch_s: 2.0,
            delay_s: 0.2,
            dwell_s: 5.0,
            local_goal_dist: 10.0,
        }
    }
}

/// Active control mode, in increasing order of priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    LongTerm,
    Dynamic,
    FailSafe,
}

/// Mode machine state carried across ticks.
#[derive(Debug, Clone, Copy)]
pub struct ModeState {
    pub mode: Mode,
    /// Time until which dynamic mode stays latched.
    pub latch_expiry: f64,
    /// Whether this tick requires a fresh dynamic plan.
    pub replan: bool,
}

impl Default for ModeState {
    fn default() -> Self {
        Self {
            mode: Mode::LongTerm,
            latch_expiry: f64::NEG_INFINITY,
            replan: false,
        }
    }
}

/// Whether any point lies in the dynamic-planning activation area: the
/// forward semicircle (r = 4 m) union the forward sector (half-angle 67.5°,
/// r = 4 + 2v). Boundaries are inclusive.
pub fn dynamic_area_check(
    points: &[Point2],
    robot_position: Point2,
    robot_heading: f64,
    v: f64,
) -> bool {
    let sector_radius = DYN_SEMICIRCLE_RADIUS_M + 2.0 * v.max(0.0);
    points.iter().any(|&p| {
        let offset = p - robot_position;
        let range = offset.norm();
        if range < 1e-12 {
            return true;
        }
        let bearing = wrap_angle(offset.y.atan2(offset.x) - robot_heading);
        let in_semicircle =
            range <= DYN_SEMICIRCLE_RADIUS_M && bearing.abs() <= std::f64::consts::FRAC_PI_2;
        let in_sector = range <= sector_radius && bearing.abs() <= DYN_SECTOR_HALF_ANGLE;
        in_semicircle || in_sector
    })
}

/// Whether the dynamic planning mode is required this tick: any confirmed
/// track both inside the framework radius and inside the dynamic area, or
/// any occupied cell centre inside the dynamic area.
pub fn dynamic_trigger(
    confirmed_tracks: &[Point2],
    occupied_centres: &[Point2],
    robot_position: Point2,
    robot_heading: f64,
    v: f64,
) -> bool {
    let track_hit = confirmed_tracks.iter().any(|&p| {
        (p - robot_position).norm() <= FRAMEWORK_RADIUS_M
            && dynamic_area_check(&[p], robot_position, robot_heading, v)
    });
    track_hit || dynamic_area_check(occupied_centres, robot_position, robot_heading, v)
}

/// One step of the mode machine. The fail-safe dominates everything; a
/// dynamic trigger re-arms the latch at `t + latch_s` and requests a replan;
/// otherwise the mode is dynamic exactly while `t < latch_expiry`.
pub fn select_mode(
    state: &ModeState,
    fs: bool,
    dyn_needed: bool,
    t: f64,
    params: &ExecutiveParams,
) -> ModeState {
    let latch_expiry = if dyn_needed {
        t + params.latch_s
    } else {
        state.latch_expiry
    };
    let mode = if fs {
        Mode::FailSafe
    } else if t < latch_expiry {
        Mode::Dynamic
    } else {
        Mode::LongTerm
    };
    ModeState {
        mode,
        latch_expiry,
        replan: dyn_needed,
    }
}

/// Expected robot state after decelerating to half speed over the planning
/// delay while continuing along the current path: the pose handed to the
/// dynamic planner as its root. Covers the planner's compute time so the
/// plan starts from where the robot will actually be.
pub fn slow_for_planning(robot: &RobotState, delay: f64) -> RobotState {
    if delay <= 0.0 || robot.speed <= 0.0 {
        return RobotState {
            time: robot.time + delay.max(0.0),
            ..*robot
        };
    }
    // Linear ramp v -> v/2 advances the mean of the two speeds times delay.
    let advance = 0.75 * robot.speed * delay;
    let dir = Vector2::new(robot.heading.cos(), robot.heading.sin());
    RobotState {
        position: robot.position + dir * advance,
        heading: robot.heading,
        speed: 0.5 * robot.speed,
        time: robot.time + delay,
    }
}

/// The global reference to track: the tour polyline flattened to the plane,
/// arc-length parameterized, with each goal's arc length and required
/// arrival accuracy (both in visit order).
#[derive(Debug, Clone)]
pub struct ReferencePath {
    points: Vec<Point2>,
    /// Cumulative arc length at each point; strictly increasing.
    cum_s: Vec<f64>,
    goal_s: Vec<f64>,
    accuracies: Vec<f64>,
}

impl ReferencePath {
    /// Build from an explicit planar polyline. `goal_s` must be expressed in
    /// the polyline's arc length and be non-decreasing; `accuracies` pairs
    /// with `goal_s` in visit order.
    pub fn new(points: Vec<Point2>, goal_s: Vec<f64>, accuracies: Vec<f64>) -> Self {
        assert_eq!(goal_s.len(), accuracies.len());
        let mut deduped: Vec<Point2> = Vec::with_capacity(points.len());
        for p in points {
            if deduped.last().map_or(true, |q| (p - q).norm() > 1e-9) {
                deduped.push(p);
            }
        }
        let mut cum_s = Vec::with_capacity(deduped.len());
        let mut s = 0.0;
        for (i, p) in deduped.iter().enumerate() {
            if i > 0 {
                s += (p - deduped[i - 1]).norm();
            }
            cum_s.push(s);
        }
        Self {
            points: deduped,
            cum_s,
            goal_s,
            accuracies,
        }
    }

    /// Flatten a computed tour. The tour's first arc-length entry is its
    /// start vertex, which is not a goal; `accuracies` pair with the actual
    /// goals in visit order.
    pub fn from_tour(tour: &Tour, accuracies: Vec<f64>) -> Self {
        let points = tour
            .polyline
            .iter()
            .map(|p| Point2::new(p[0], p[1]))
            .collect();
        let goal_s = tour.goal_s.iter().skip(1).copied().collect();
        Self::new(points, goal_s, accuracies)
    }

    pub fn total_length(&self) -> f64 {
        *self.cum_s.last().unwrap_or(&0.0)
    }

    pub fn goal_count(&self) -> usize {
        self.goal_s.len()
    }

    pub fn goal_accuracy(&self, goal_idx: usize) -> f64 {
        self.accuracies[goal_idx]
    }

    /// The goal waypoint's position on the path.
    pub fn goal_point(&self, goal_idx: usize) -> Point2 {
        self.point_at(self.goal_s[goal_idx])
    }

    /// Point at arc length `s`, clamped to the path's ends.
    pub fn point_at(&self, s: f64) -> Point2 {
        if self.points.len() == 1 || s <= 0.0 {
            return self.points[0];
        }
        let s = s.min(self.total_length());
        let seg = match self.cum_s.binary_search_by(|c| c.total_cmp(&s)) {
            Ok(i) => i.min(self.points.len() - 2),
            Err(i) => i - 1,
        };
        let seg_len = self.cum_s[seg + 1] - self.cum_s[seg];
        let t = if seg_len > 0.0 {
            (s - self.cum_s[seg]) / seg_len
        } else {
            0.0
        };
        self.points[seg] + (self.points[seg + 1] - self.points[seg]) * t
    }

    /// Arc length of the reference point closest to `p` (the perpendicular
    /// foot on the nearest segment; ties go to the smaller arc length).
    pub fn project(&self, p: Point2) -> f64 {
        if self.points.len() == 1 {
            return 0.0;
        }
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..self.points.len() - 1 {
            let a = self.points[i];
            let b = self.points[i + 1];
            let ab = b - a;
            let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
            let foot = a + ab * t;
            let d2 = (p - foot).norm_squared();
            if d2 < best.0 {
                best = (d2, self.cum_s[i] + t * ab.norm());
            }
        }
        best.1
    }

    /// The moving local goal: the on-path point `local_goal_dist` ahead of
    /// the robot's projection, clamped to the current goal waypoint when
    /// less than that distance remains.
    pub fn local_goal(&self, robot: Point2, goal_idx: usize, params: &ExecutiveParams) -> Point2 {
        let s_star = self.project(robot);
        let s_goal = self.goal_s[goal_idx];
        self.point_at((s_star + params.local_goal_dist).min(s_goal))
    }
}

/// A velocity command for the holonomic base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityCommand {
    pub linear: Vector2,
    pub angular: f64,
}

impl VelocityCommand {
    pub fn zero() -> Self {
        Self {
            linear: Vector2::new(0.0, 0.0),
            angular: 0.0,
        }
    }
}

/// What pure pursuit is steering toward.
#[derive(Debug, Clone, Copy)]
pub enum PursuitTarget<'a> {
    /// Track the reference path toward the indexed goal waypoint.
    Path {
        reference: &'a ReferencePath,
        goal_idx: usize,
    },
    /// Steer straight at a point (used for dynamic-plan step targets).
    Point(Point2),
}

/// P-controlled pursuit of a moving target point: linear velocity is the
/// clamped P term on the positional error to the lookahead point (2 m ahead
/// on paths, the point itself otherwise); the angular rate turns the heading
/// toward the direction of travel. Inside `accuracy` of the goal the
/// command is exactly zero.
pub fn pure_pursuit_step(
    robot: &RobotState,
    target: &PursuitTarget,
    accuracy: f64,
    params: &ExecutiveParams,
) -> VelocityCommand {
    let (goal, lookahead_point) = match target {
        PursuitTarget::Path {
            reference,
            goal_idx,
        } => {
            let goal = reference.goal_point(*goal_idx);
            let s_star = reference.project(robot.position);
            let s_look = (s_star + params.lookahead).min(reference.goal_s[*goal_idx]);
            (goal, reference.point_at(s_look))
        }
        PursuitTarget::Point(p) => (*p, *p),
    };
    if (goal - robot.position).norm() <= accuracy {
        return VelocityCommand::zero();
    }
    let error = lookahead_point - robot.position;
    let mut linear = error * params.pos_gain;
    let magnitude = linear.norm();
    if magnitude > params.v_max {
        linear *= params.v_max / magnitude;
    }
    let angular = if magnitude > 1e-9 {
        let travel_dir = linear.y.atan2(linear.x);
        (params.heading_gain * wrap_angle(travel_dir - robot.heading))
            .clamp(-params.omega_max, params.omega_max)
    } else {
        0.0
    };
    VelocityCommand { linear, angular }
}

/// Whether the robot has reached the goal to the required accuracy.
pub fn waypoint_arrival(robot_position: Point2, goal: Point2, accuracy: f64) -> bool {
    (goal - robot_position).norm() <= accuracy
}

/// Tour progress: which goal is active, and the dwell countdown at each
/// reached waypoint before advancing to the next leg.
#[derive(Debug, Clone, Copy, Default)]
pub struct TourProgress {
    pub goal_idx: usize,
    pub dwell_until: Option<f64>,
    pub done: bool,
}

/// What the robot should be doing about the tour this tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TourPhase {
    /// Drive toward the current goal.
    Tracking,
    /// Arrived: hold position (stationary, static power only).
    Dwelling,
    /// All goals visited.
    Done,
}

impl TourProgress {
    /// Advance the arrival/dwell machine and report the current phase.
    pub fn on_tick(
        &mut self,
        robot_position: Point2,
        reference: &ReferencePath,
        t: f64,
        params: &ExecutiveParams,
    ) -> TourPhase {
        if self.done {
            return TourPhase::Done;
        }
        if let Some(until) = self.dwell_until {
            if t < until {
                return TourPhase::Dwelling;
            }
            self.dwell_until = None;
            if self.goal_idx + 1 >= reference.goal_count() {
                self.done = true;
                return TourPhase::Done;
            }
            self.goal_idx += 1;
            return TourPhase::Tracking;
        }
        let goal = reference.goal_point(self.goal_idx);
        if waypoint_arrival(robot_position, goal, reference.goal_accuracy(self.goal_idx)) {
            self.dwell_until = Some(t + params.dwell_s);
            return TourPhase::Dwelling;
        }
        TourPhase::Tracking
    }
}
