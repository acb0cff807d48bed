//! Ground-truth pedestrian crowd driven by reciprocal collision avoidance
//! (ORCA).
//!
//! Each sub-step every agent picks the velocity closest to its preferred
//! velocity that satisfies one half-plane constraint per neighbour (mutual,
//! half responsibility each) and per the robot disc (full responsibility on
//! the agent — the robot's own avoidance is the planner's job, and modelling
//! it here would mask planner failures). The update is synchronous: all new
//! velocities are computed from the same state snapshot, then integrated.

use crate::geom::{Point2, Rect, Vector2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use thiserror::Error;

/// Crowd-wide tuning parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CrowdParams {
    /// Agent body radius (m).
    pub agent_radius: f64,
    /// Surface-to-surface distance (m) within which agents react to each
    /// other and to the robot.
    pub neighbour_dist: f64,
    /// Collision-avoidance time horizon (s), for agents and robot alike.
    pub tau: f64,
    /// Hard speed cap (m/s); also the upper preferred-speed bound.
    pub max_speed: f64,
    /// Distance (m) to a goal at which it counts as reached.
    pub arrival_radius: f64,
    /// Preferred speeds are drawn uniformly from this range (m/s).
    pub pref_speed_range: (f64, f64),
    /// Extra personal-space buffer (m) agents grant the robot on top of its
    /// physical radius. Avoidance along the exact contact boundary would let
    /// discrete integration graze it; the buffer keeps ground-truth
    /// separation strictly clear of contact.
    pub robot_margin: f64,
}

impl Default for CrowdParams {
    fn default() -> Self {
        Self {
            agent_radius: 0.5,
            neighbour_dist: 1.5,
            tau: 2.0,
            max_speed: 1.5,
            arrival_radius: 0.5,
            pref_speed_range: (0.1, 1.5),
            robot_margin: 0.3,
        }
    }
}

/// What an agent does after reaching its goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoalPolicy {
    /// Pick a new uniform point on the opposite half of the arena, keep
    /// walking.
    Cross,
    /// Keep the spawn point as the goal: dodge if needed, then return.
    Hold,
}

/// One simulated pedestrian.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: usize,
    pub position: Point2,
    pub velocity: Vector2,
    pub radius: f64,
    pub pref_speed: f64,
    pub goal: Point2,
}

/// The robot as the crowd sees it: a disc with a velocity. Agents take full
/// avoidance responsibility against it (no reciprocity).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotDisc {
    pub position: Point2,
    pub velocity: Vector2,
    pub radius: f64,
}

/// Errors from crowd construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CrowdError {
    #[error("could not place {placed} of {requested} agents without overlap")]
    PlacementFailed { placed: usize, requested: usize },
}

/// The crowd state plus everything needed to advance it deterministically.
#[derive(Debug, Clone)]
pub struct Crowd {
    pub agents: Vec<Agent>,
    /// Simulation time (s), advanced by each sub-step.
    pub time: f64,
    pub params: CrowdParams,
    pub policy: GoalPolicy,
    pub arena: Rect,
    /// Cumulative count of agent sub-steps whose velocity program was
    /// infeasible (agent froze for that sub-step). While this stays zero the
    /// crowd is in the regime where pairwise separation is guaranteed.
    pub infeasible_events: usize,
    rng: ChaCha8Rng,
}

/// A half-plane constraint on velocity: feasible velocities lie on or to the
/// left of the directed line through `point` along `direction`.
#[derive(Debug, Clone, Copy)]
struct OrcaLine {
    point: Vector2,
    direction: Vector2,
}

fn det(a: Vector2, b: Vector2) -> f64 {
    a.x * b.y - a.y * b.x
}

impl Crowd {
    /// Build a crowd from explicit agents (velocities zeroed, ids
    /// renumbered in order).
    pub fn from_agents(
        mut agents: Vec<Agent>,
        arena: Rect,
        policy: GoalPolicy,
        params: CrowdParams,
        rng: ChaCha8Rng,
    ) -> Self {
        for (i, a) in agents.iter_mut().enumerate() {
            a.id = i;
        }
        Self {
            agents,
            time: 0.0,
            infeasible_events: 0,
            params,
            policy,
            arena,
            rng,
        }
    }

    /// Spawn `floor(area / density)` agents uniformly without overlap,
    /// preferred speeds uniform in the configured range, first goals drawn by
    /// the policy. `keepout` excludes a disc (e.g. around the robot start)
    /// from placement.
    pub fn spawn_density(
        arena: Rect,
        density: f64,
        policy: GoalPolicy,
        params: CrowdParams,
        keepout: Option<(Point2, f64)>,
        mut rng: ChaCha8Rng,
    ) -> Result<Self, CrowdError> {
        let count = (arena.area() / density).floor() as usize;
        let mut agents: Vec<Agent> = Vec::with_capacity(count);
        let max_attempts = 1000 * count.max(1);
        let mut attempts = 0;
        while agents.len() < count {
            if attempts >= max_attempts {
                return Err(CrowdError::PlacementFailed {
                    placed: agents.len(),
                    requested: count,
                });
            }
            attempts += 1;
            let pos = Point2::new(
                rng.gen_range(arena.min.x..=arena.max.x),
                rng.gen_range(arena.min.y..=arena.max.y),
            );
            if let Some((centre, radius)) = keepout {
                if (pos - centre).norm() < radius {
                    continue;
                }
            }
            if agents
                .iter()
                .any(|a| (pos - a.position).norm() < 2.0 * params.agent_radius)
            {
                continue;
            }
            let pref_speed = rng.gen_range(params.pref_speed_range.0..=params.pref_speed_range.1);
            agents.push(Agent {
                id: agents.len(),
                position: pos,
                velocity: Vector2::zeros(),
                radius: params.agent_radius,
                pref_speed,
                goal: pos, // placeholder until drawn below
            });
        }
        let mut crowd = Self {
            agents,
            time: 0.0,
            infeasible_events: 0,
            params,
            policy,
            arena,
            rng,
        };
        for i in 0..crowd.agents.len() {
            crowd.agents[i].goal = match policy {
                GoalPolicy::Cross => crowd.draw_opposite_goal(crowd.agents[i].position),
                GoalPolicy::Hold => crowd.agents[i].position,
            };
        }
        Ok(crowd)
    }

    /// Uniform point in the half of the arena opposite the given position
    /// (relative to the arena centre), by rejection.
    fn draw_opposite_goal(&mut self, from: Point2) -> Point2 {
        let centre = self.arena.center();
        let side = from - centre;
        for _ in 0..10_000 {
            let p = Point2::new(
                self.rng.gen_range(self.arena.min.x..=self.arena.max.x),
                self.rng.gen_range(self.arena.min.y..=self.arena.max.y),
            );
            if (p - centre).dot(&side) < 0.0 {
                return p;
            }
        }
        // Degenerate arena (or agent exactly at the centre): fall back to
        // the centre itself.
        centre
    }

    /// Advance one sub-step of `dt` seconds against the robot disc.
    ///
    /// Every agent selects the feasible velocity closest to its preferred
    /// velocity (capped at max speed); an infeasible program falls back to
    /// zero velocity for that agent this sub-step — except while the agent
    /// penetrates the robot's buffered disc, where freezing would deadlock
    /// (zero velocity keeps the program infeasible forever in a press). There
    /// the agent honours the robot constraint alone, so ground-truth
    /// separation always recovers. Agents arriving at their goals get new
    /// goals per the policy.
    pub fn step(&mut self, robot: &RobotDisc, dt: f64) {
        let index = NeighbourIndex::build(&self.agents);
        let mut new_velocities = Vec::with_capacity(self.agents.len());
        let mut infeasible = 0;
        for (i, agent) in self.agents.iter().enumerate() {
            let pref = self.preferred_velocity(agent);
            let (lines, robot_overlap) = self.orca_lines(i, agent, robot, &index, dt);
            let v = match solve_velocity(&lines, self.params.max_speed, pref) {
                Some(v) => v,
                None => {
                    infeasible += 1;
                    if robot_overlap {
                        solve_velocity(&lines[..1], self.params.max_speed, pref)
                            .unwrap_or_else(Vector2::zeros)
                    } else {
                        Vector2::zeros()
                    }
                }
            };
            new_velocities.push(v);
        }
        self.infeasible_events += infeasible;
        for (agent, v) in self.agents.iter_mut().zip(&new_velocities) {
            agent.velocity = *v;
            agent.position += *v * dt;
        }
        self.time += dt;
        // Goal management after integration, in index order.
        for i in 0..self.agents.len() {
            let arrived =
                (self.agents[i].position - self.agents[i].goal).norm() <= self.params.arrival_radius;
            if arrived && self.policy == GoalPolicy::Cross {
                self.agents[i].goal = self.draw_opposite_goal(self.agents[i].position);
            }
        }
    }

    fn preferred_velocity(&self, agent: &Agent) -> Vector2 {
        let to_goal = agent.goal - agent.position;
        let dist = to_goal.norm();
        if dist <= self.params.arrival_radius {
            return Vector2::zeros();
        }
        to_goal * (agent.pref_speed / dist)
    }

    /// Half-plane constraints for agent `i`: the robot first (if in range),
    /// then neighbours in ascending index order. The flag reports whether the
    /// agent currently penetrates the buffered robot disc (in which case the
    /// robot's line heads the list).
    fn orca_lines(
        &self,
        i: usize,
        agent: &Agent,
        robot: &RobotDisc,
        index: &NeighbourIndex,
        dt: f64,
    ) -> (Vec<OrcaLine>, bool) {
        let mut lines = Vec::new();
        let buffered = robot.radius + self.params.robot_margin;
        let gap_robot = (robot.position - agent.position).norm() - agent.radius - buffered;
        let exit_cap = self.params.max_speed * 0.8;
        if gap_robot <= self.params.neighbour_dist {
            lines.push(orca_line_against(
                agent.position,
                agent.velocity,
                agent.radius,
                robot.position,
                robot.velocity,
                buffered,
                self.params.tau,
                dt,
                1.0,
                exit_cap,
            ));
        }
        for &j in &index.candidates(agent.position) {
            if j == i {
                continue;
            }
            let other = &self.agents[j];
            let gap = (other.position - agent.position).norm() - agent.radius - other.radius;
            if gap > self.params.neighbour_dist {
                continue;
            }
            lines.push(orca_line_against(
                agent.position,
                agent.velocity,
                agent.radius,
                other.position,
                other.velocity,
                other.radius,
                self.params.tau,
                dt,
                0.5,
                exit_cap,
            ));
        }
        (lines, gap_robot < 0.0)
    }
}

/// Uniform-grid spatial hash so each agent only examines nearby candidates.
/// Candidate lists are returned sorted so downstream iteration order is
/// deterministic.
struct NeighbourIndex {
    cell: f64,
    map: HashMap<(i64, i64), Vec<usize>>,
}

impl NeighbourIndex {
    fn build(agents: &[Agent]) -> Self {
        // Cell size covers the largest agent-agent interaction range
        // (neighbour_dist + two radii), so a 3×3 window suffices.
        let cell = 2.5;
        let mut map: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, a) in agents.iter().enumerate() {
            let key = (
                (a.position.x / cell).floor() as i64,
                (a.position.y / cell).floor() as i64,
            );
            map.entry(key).or_default().push(i);
        }
        Self { cell, map }
    }

    fn candidates(&self, p: Point2) -> Vec<usize> {
        let cx = (p.x / self.cell).floor() as i64;
        let cy = (p.y / self.cell).floor() as i64;
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = self.map.get(&(cx + dx, cy + dy)) {
                    out.extend_from_slice(list);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// The ORCA half-plane induced on the focal agent by one neighbour.
///
/// `responsibility` is the share of the avoidance this agent takes: 0.5 for
/// mutual agent-agent avoidance, 1.0 against the non-reciprocating robot.
/// `exit_cap` bounds the de-penetration rate (m/s) demanded when the discs
/// already overlap; an unbounded demand would exceed any speed cap and leave
/// the velocity program permanently infeasible, freezing the agent in place
/// exactly when it most needs to move away.
#[allow(clippy::too_many_arguments)]
fn orca_line_against(
    pos: Point2,
    vel: Vector2,
    radius: f64,
    other_pos: Point2,
    other_vel: Vector2,
    other_radius: f64,
    tau: f64,
    dt: f64,
    responsibility: f64,
    exit_cap: f64,
) -> OrcaLine {
    let relative_position = other_pos - pos;
    let relative_velocity = vel - other_vel;
    let dist_sq = relative_position.norm_squared();
    let combined_radius = radius + other_radius;
    let combined_radius_sq = combined_radius * combined_radius;

    let (direction, u);
    if dist_sq > combined_radius_sq {
        // No current collision: constrain against the velocity-obstacle
        // truncated cone with cutoff time tau.
        let inv_tau = 1.0 / tau;
        let w = relative_velocity - relative_position * inv_tau;
        let w_len_sq = w.norm_squared();
        let dot1 = w.dot(&relative_position);
        if dot1 < 0.0 && dot1 * dot1 > combined_radius_sq * w_len_sq {
            // Project on the cutoff circle.
            let w_len = w_len_sq.sqrt();
            let unit_w = w / w_len;
            direction = Vector2::new(unit_w.y, -unit_w.x);
            u = unit_w * (combined_radius * inv_tau - w_len);
        } else {
            // Project on the nearer leg of the cone.
            let leg = (dist_sq - combined_radius_sq).sqrt();
            let dir = if det(relative_position, w) > 0.0 {
                Vector2::new(
                    relative_position.x * leg - relative_position.y * combined_radius,
                    relative_position.x * combined_radius + relative_position.y * leg,
                ) / dist_sq
            } else {
                -Vector2::new(
                    relative_position.x * leg + relative_position.y * combined_radius,
                    -relative_position.x * combined_radius + relative_position.y * leg,
                ) / dist_sq
            };
            direction = dir;
            let dot2 = relative_velocity.dot(&direction);
            u = direction * dot2 - relative_velocity;
        }
    } else {
        // Already overlapping: push apart within one time step.
        let inv_dt = 1.0 / dt;
        let w = relative_velocity - relative_position * inv_dt;
        let w_len = w.norm();
        let unit_w = if w_len > 1e-12 {
            w / w_len
        } else {
            // Coincident centres: pick a fixed separating direction.
            Vector2::new(1.0, 0.0)
        };
        direction = Vector2::new(unit_w.y, -unit_w.x);
        u = unit_w * (combined_radius * inv_dt - w_len).min(exit_cap);
    }
    OrcaLine {
        point: vel + u * responsibility,
        direction,
    }
}

/// Velocity nearest to `pref` inside the max-speed disc and on the feasible
/// side of every line. `None` when the program is infeasible.
fn solve_velocity(lines: &[OrcaLine], max_speed: f64, pref: Vector2) -> Option<Vector2> {
    let mut result = if pref.norm() > max_speed {
        pref.normalize() * max_speed
    } else {
        pref
    };
    for (i, line) in lines.iter().enumerate() {
        if det(line.direction, line.point - result) > 0.0 {
            // Current result violates this constraint: reproject onto the
            // line, respecting all earlier constraints.
            match project_on_line(lines, i, max_speed, pref) {
                Some(v) => result = v,
                None => return None,
            }
        }
    }
    Some(result)
}

/// Optimize along constraint line `line_no` within the speed disc, subject
/// to all earlier lines.
fn project_on_line(
    lines: &[OrcaLine],
    line_no: usize,
    max_speed: f64,
    pref: Vector2,
) -> Option<Vector2> {
    let line = &lines[line_no];
    let dot_product = line.point.dot(&line.direction);
    let discriminant = dot_product * dot_product + max_speed * max_speed - line.point.norm_squared();
    if discriminant < 0.0 {
        // Max-speed circle misses the line entirely.
        return None;
    }
    let sqrt_disc = discriminant.sqrt();
    let mut t_left = -dot_product - sqrt_disc;
    let mut t_right = -dot_product + sqrt_disc;

    for prev in &lines[..line_no] {
        let denominator = det(line.direction, prev.direction);
        let numerator = det(prev.direction, line.point - prev.point);
        if denominator.abs() <= 1e-12 {
            // Parallel constraints.
            if numerator < 0.0 {
                return None;
            }
            continue;
        }
        let t = numerator / denominator;
        if denominator >= 0.0 {
            t_right = t_right.min(t);
        } else {
            t_left = t_left.max(t);
        }
        if t_left > t_right {
            return None;
        }
    }

    let t_pref = line.direction.dot(&(pref - line.point));
    let t = t_pref.clamp(t_left, t_right);
    Some(line.point + line.direction * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params() -> CrowdParams {
        CrowdParams::default()
    }

    fn far_robot() -> RobotDisc {
        RobotDisc {
            position: Point2::new(1e6, 1e6),
            velocity: Vector2::zeros(),
            radius: 1.5,
        }
    }

    fn arena(w: f64, h: f64) -> Rect {
        Rect::new(0.0, 0.0, w, h)
    }

    fn single_agent_crowd(agent: Agent) -> Crowd {
        Crowd::from_agents(
            vec![agent],
            arena(40.0, 40.0),
            GoalPolicy::Hold,
            params(),
            crate::rng::stream(1, "crowd", 0),
        )
    }

    #[test]
    fn lone_agent_walks_straight_to_goal_at_pref_speed() {
        let mut crowd = single_agent_crowd(Agent {
            id: 0,
            position: Point2::new(5.0, 20.0),
            velocity: Vector2::zeros(),
            radius: 0.5,
            pref_speed: 1.2,
            goal: Point2::new(15.0, 20.0),
        });
        let robot = far_robot();
        for _ in 0..40 {
            crowd.step(&robot, 0.05);
            let a = &crowd.agents[0];
            assert_abs_diff_eq!(a.velocity.y, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(a.velocity.x, 1.2, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(crowd.agents[0].position.x, 5.0 + 1.2 * 2.0, epsilon = 1e-9);
    }

    #[test]
    fn agent_at_its_goal_stays_still() {
        let mut crowd = single_agent_crowd(Agent {
            id: 0,
            position: Point2::new(10.0, 10.0),
            velocity: Vector2::zeros(),
            radius: 0.5,
            pref_speed: 1.0,
            goal: Point2::new(10.0, 10.0),
        });
        let robot = far_robot();
        for _ in 0..20 {
            crowd.step(&robot, 0.05);
            assert_eq!(crowd.agents[0].velocity, Vector2::zeros());
            assert_eq!(crowd.agents[0].position, Point2::new(10.0, 10.0));
        }
    }

    #[test]
    fn head_on_pair_mirrors_and_never_overlaps() {
        let make = |x: f64, sign: f64| Agent {
            id: 0,
            position: Point2::new(x, 20.0),
            velocity: Vector2::zeros(),
            radius: 0.5,
            pref_speed: 1.0,
            goal: Point2::new(x + sign * 10.0, 20.0),
        };
        let mut crowd = Crowd::from_agents(
            vec![make(15.0, 1.0), make(25.0, -1.0)],
            arena(40.0, 40.0),
            GoalPolicy::Hold,
            params(),
            crate::rng::stream(2, "crowd", 0),
        );
        let robot = far_robot();
        let mut min_dist = f64::INFINITY;
        let mut max_abs_y_dev = 0.0_f64;
        for _ in 0..400 {
            crowd.step(&robot, 0.05);
            let a = crowd.agents[0].position;
            let b = crowd.agents[1].position;
            min_dist = min_dist.min((a - b).norm());
            // Point symmetry about the midpoint (20, 20).
            assert_abs_diff_eq!(a.x + b.x, 40.0, epsilon = 1e-6);
            assert_abs_diff_eq!(a.y + b.y, 40.0, epsilon = 1e-6);
            max_abs_y_dev = max_abs_y_dev.max((a.y - 20.0).abs());
        }
        assert!(min_dist >= 1.0 - 1e-6, "agents overlapped: {min_dist}");
        assert!(max_abs_y_dev > 1e-3, "agents never deviated, they must dodge");
        // Both ultimately pass each other and reach their goals.
        assert!((crowd.agents[0].position - crowd.agents[0].goal).norm() < 0.6);
        assert!((crowd.agents[1].position - crowd.agents[1].goal).norm() < 0.6);
    }

    #[test]
    fn crossing_crowd_in_feasible_regime_never_overlaps() {
        let mut crowd = Crowd::spawn_density(
            arena(30.0, 30.0),
            56.25,
            GoalPolicy::Cross,
            params(),
            None,
            crate::rng::stream(3, "crowd", 0),
        )
        .unwrap();
        assert_eq!(crowd.agents.len(), 16);
        let robot = far_robot();
        let mut min_dist = f64::INFINITY;
        for _ in 0..600 {
            crowd.step(&robot, 0.05);
            for i in 0..crowd.agents.len() {
                for j in i + 1..crowd.agents.len() {
                    let d = (crowd.agents[i].position - crowd.agents[j].position).norm();
                    min_dist = min_dist.min(d);
                }
            }
        }
        assert_eq!(
            crowd.infeasible_events, 0,
            "scenario left the feasible regime; pick a sparser layout"
        );
        assert!(min_dist >= 1.0 - 1e-6, "overlap at distance {min_dist}");
    }

    #[test]
    fn packed_crowd_overlap_bounded_and_absent_on_feasible_substeps() {
        // Dense enough that some velocity programs go infeasible (agents
        // briefly freeze). Separation is guaranteed on fully feasible
        // sub-steps; around freezes, any penetration must stay shallow and
        // transient.
        let mut crowd = Crowd::spawn_density(
            arena(20.0, 20.0),
            25.0,
            GoalPolicy::Cross,
            params(),
            None,
            crate::rng::stream(3, "crowd", 0),
        )
        .unwrap();
        assert_eq!(crowd.agents.len(), 16);
        let robot = far_robot();
        let mut min_dist = f64::INFINITY;
        let mut min_dist_feasible = f64::INFINITY;
        for _ in 0..600 {
            let before = crowd.infeasible_events;
            crowd.step(&robot, 0.05);
            let mut step_min = f64::INFINITY;
            for i in 0..crowd.agents.len() {
                for j in i + 1..crowd.agents.len() {
                    let d = (crowd.agents[i].position - crowd.agents[j].position).norm();
                    step_min = step_min.min(d);
                }
            }
            min_dist = min_dist.min(step_min);
            if crowd.infeasible_events == before {
                min_dist_feasible = min_dist_feasible.min(step_min);
            }
        }
        assert!(
            min_dist_feasible >= 1.0 - 1e-6,
            "overlap on a feasible sub-step: {min_dist_feasible}"
        );
        assert!(
            min_dist >= 0.9,
            "penetration too deep even for the frozen-agent regime: {min_dist}"
        );
    }

    #[test]
    fn agents_never_penetrate_the_robot_disc() {
        // Agents streaming across a stationary robot in the middle.
        let mut agents = Vec::new();
        for k in 0..8 {
            let y = 16.0 + k as f64;
            agents.push(Agent {
                id: 0,
                position: Point2::new(4.0, y),
                velocity: Vector2::zeros(),
                radius: 0.5,
                pref_speed: 1.4,
                goal: Point2::new(36.0, y),
            });
        }
        let mut crowd = Crowd::from_agents(
            agents,
            arena(40.0, 40.0),
            GoalPolicy::Hold,
            params(),
            crate::rng::stream(4, "crowd", 0),
        );
        let robot = RobotDisc {
            position: Point2::new(20.0, 19.5),
            velocity: Vector2::zeros(),
            radius: 1.5,
        };
        let mut min_gap = f64::INFINITY;
        for _ in 0..800 {
            crowd.step(&robot, 0.05);
            for a in &crowd.agents {
                let gap = (a.position - robot.position).norm() - a.radius - robot.radius;
                min_gap = min_gap.min(gap);
            }
        }
        assert!(min_gap >= -1e-6, "agent penetrated the robot: gap {min_gap}");
        // The stream must still make progress past the robot.
        let through = crowd
            .agents
            .iter()
            .filter(|a| a.position.x > 25.0)
            .count();
        assert!(through >= 6, "only {through} agents passed the robot");
    }

    #[test]
    fn spawn_counts_follow_floor_of_area_over_density() {
        let crowd = Crowd::spawn_density(
            arena(10.0, 10.0),
            25.0,
            GoalPolicy::Cross,
            params(),
            None,
            crate::rng::stream(5, "crowd", 0),
        )
        .unwrap();
        assert_eq!(crowd.agents.len(), 4);

        let crowd = Crowd::spawn_density(
            arena(30.0, 30.0),
            10.0,
            GoalPolicy::Cross,
            params(),
            None,
            crate::rng::stream(6, "crowd", 0),
        )
        .unwrap();
        assert_eq!(crowd.agents.len(), 90);
        for i in 0..crowd.agents.len() {
            for j in i + 1..crowd.agents.len() {
                let d = (crowd.agents[i].position - crowd.agents[j].position).norm();
                assert!(d >= 1.0, "spawn overlap at {d}");
            }
            let a = &crowd.agents[i];
            assert!(a.pref_speed >= 0.1 && a.pref_speed <= 1.5);
            // Cross policy: first goal lies in the opposite half.
            let c = crowd.arena.center();
            assert!((a.goal - c).dot(&(a.position - c)) < 0.0);
        }
    }

    #[test]
    fn spawn_respects_keepout_disc() {
        let keepout = (Point2::new(10.0, 10.0), 2.5);
        let crowd = Crowd::spawn_density(
            arena(20.0, 20.0),
            10.0,
            GoalPolicy::Cross,
            params(),
            Some(keepout),
            crate::rng::stream(7, "crowd", 0),
        )
        .unwrap();
        assert_eq!(crowd.agents.len(), 40);
        for a in &crowd.agents {
            assert!((a.position - keepout.0).norm() >= keepout.1);
        }
    }

    #[test]
    fn spawn_fails_when_density_is_impossible() {
        // 0.5 m² per agent cannot host 1 m-spaced discs.
        let err = Crowd::spawn_density(
            arena(5.0, 5.0),
            0.5,
            GoalPolicy::Cross,
            params(),
            None,
            crate::rng::stream(8, "crowd", 0),
        )
        .unwrap_err();
        assert!(matches!(err, CrowdError::PlacementFailed { .. }));
    }

    #[test]
    fn fixed_seed_reproduces_spawn_and_trajectories_exactly() {
        let run = || {
            let mut crowd = Crowd::spawn_density(
                arena(15.0, 15.0),
                15.0,
                GoalPolicy::Cross,
                params(),
                None,
                crate::rng::stream(9, "crowd", 0),
            )
            .unwrap();
            let robot = RobotDisc {
                position: Point2::new(7.5, 7.5),
                velocity: Vector2::new(0.3, 0.0),
                radius: 1.5,
            };
            for _ in 0..200 {
                crowd.step(&robot, 0.05);
            }
            crowd
                .agents
                .iter()
                .map(|a| (a.position.x, a.position.y, a.velocity.x, a.velocity.y))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn cross_policy_reassigns_goals_on_arrival() {
        let mut crowd = Crowd::from_agents(
            vec![Agent {
                id: 0,
                position: Point2::new(3.0, 10.0),
                velocity: Vector2::zeros(),
                radius: 0.5,
                pref_speed: 1.5,
                goal: Point2::new(5.0, 10.0),
            }],
            arena(20.0, 20.0),
            GoalPolicy::Cross,
            params(),
            crate::rng::stream(10, "crowd", 0),
        );
        let robot = far_robot();
        let first_goal = crowd.agents[0].goal;
        for _ in 0..60 {
            crowd.step(&robot, 0.05);
        }
        let new_goal = crowd.agents[0].goal;
        assert_ne!(first_goal, new_goal, "goal should have been reassigned");
        // The agent arrived near (5, 10), in the left half of the arena; the
        // replacement goal must lie in the opposite (right) half.
        assert!(new_goal.x > 10.0);
    }
}
