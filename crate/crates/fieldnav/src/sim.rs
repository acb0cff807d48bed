//! Closed-loop simulation: builds the world, roadmap, and tour offline,
//! then runs the 0.2 s tick loop coupling perception, tracking, mode
//! selection, local planning, crowd motion, and energy accounting into a
//! run log.
//!
//! # Determinism
//!
//! Every random draw comes from a labelled stream of the scenario seed
//! ([`crate::rng::stream`]): `"prm"` for roadmap sampling, `"crowd"` for
//! agent placement and goal churn, and per-tick `"perception"` / `"mcts"`
//! streams indexed by tick number. Two runs of the same scenario therefore
//! produce byte-identical logs regardless of what other components consume.
//!
//! # Plan pipeline
//!
//! Dynamic-mode planning models a one-tick computation delay: a plan
//! requested on tick `k` is followed from tick `k + 1`. On a *cold start*
//! (no plan active yet) the robot brakes to half speed for the tick and the
//! planner roots at the pose reached after that slow-down; on a *warm*
//! replan the robot keeps following the active plan and the new search
//! roots at the active plan's pose one tick ahead. Leaving dynamic mode
//! discards any active or pending plan — predictions go stale within a
//! couple of seconds, so a latched plan must never outlive its latch.

use std::path::PathBuf;

use thiserror::Error;

use crate::crowd::{Crowd, CrowdError, CrowdParams, GoalPolicy, RobotDisc};
use crate::energy::instantaneous_power;
use crate::executive::{
    dynamic_trigger, pure_pursuit_step, select_mode, slow_for_planning, ExecutiveParams, Mode,
    ModeState, PursuitTarget, ReferencePath, TourPhase, TourProgress, VelocityCommand,
};
use crate::geom::{wrap_angle, Point2, Polygon, PolygonError, Vector2};
use crate::perception::detection::sense;
use crate::perception::{occupancy_snapshot, DetectionModel, TrackSet, TrackerParams};
use crate::planners::{
    action_space, custom_action_space, fs_check, mcts_plan, pf_plan, Action, CostParams, Plan,
    PlannerKind, RobotState, ACTION_DHEADINGS_DEG, ACTION_SPEEDS,
};
use crate::rng::stream;
use crate::roadmap::{generate_roadmap, goal_graph, RoadmapError};
use crate::runlog::{RunLog, TickRecord};
use crate::scenario::{CrowdPolicyConfig, HeightmapSource, Scenario};
use crate::terrain::{Heightmap, ObstacleSet, TerrainError, WorldModel};
use crate::tour::{apply_precedence, solve_tour, GoalGraph, Tour, TourError};

/// Simulation tick length (s); perception, planning, and control all run at
/// this rate.
pub const TICK_DT: f64 = 0.2;
/// Crowd dynamics substeps per tick (15 ms–50 ms integration is standard
/// for reciprocal avoidance; 4 × 0.05 s fits the tick exactly).
pub const CROWD_SUBSTEPS: usize = 4;
/// Magnitude limit on commanded velocity change (m/s²).
pub const ACCEL_LIMIT: f64 = 1.0;

/// Everything that can sink a run before or during the tick loop.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("terrain: {0}")]
    Terrain(#[from] TerrainError),
    #[error("obstacle polygon: {0}")]
    Polygon(#[from] PolygonError),
    #[error("cannot read heightmap {path}: {source}")]
    HeightmapIo {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("roadmap: {0}")]
    Roadmap(#[from] RoadmapError),
    #[error("tour: {0}")]
    Tour(#[from] TourError),
    #[error("crowd: {0}")]
    Crowd(#[from] CrowdError),
    #[error("unknown detection model `{0}`")]
    UnknownDetectionModel(String),
}

/// A finished run: the tick log plus the offline artefacts it tracked.
#[derive(Debug, Clone)]
pub struct SimResult {
    pub log: RunLog,
    pub tour: Tour,
    pub reference: ReferencePath,
    /// Total electrical energy over the logged ticks (J).
    pub total_energy_j: f64,
}

/// Build the world model from the scenario's heightmap source and obstacle
/// polygons.
pub fn build_world(scenario: &Scenario) -> Result<WorldModel, SimError> {
    let heightmap = match &scenario.world.heightmap {
        HeightmapSource::Flat {
            ncols,
            nrows,
            cellsize,
        } => Heightmap::from_fn(*ncols, *nrows, 0.0, 0.0, *cellsize, |_, _| 0.0),
        HeightmapSource::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| SimError::HeightmapIo {
                path: path.clone(),
                source,
            })?;
            Heightmap::parse_ascii_grid(&text)?
        }
    };
    let polygons = scenario
        .world
        .obstacles
        .iter()
        .map(|vs| Polygon::new(vs.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(WorldModel::new(heightmap, ObstacleSet::new(polygons)))
}

/// Start and goal poses with headings resolved: explicit headings win;
/// otherwise a goal faces away from the start and the start faces the first
/// listed goal.
pub fn resolved_poses(scenario: &Scenario) -> Vec<(f64, f64, f64)> {
    let (start, start_heading) = scenario.goals.start;
    let goals = &scenario.goals.goals;
    let toward = |from: Point2, to: Point2| {
        let d = to - from;
        d.y.atan2(d.x)
    };
    let sh = start_heading.unwrap_or_else(|| toward(start, goals[0].0));
    let mut poses = vec![(start.x, start.y, sh)];
    for &(p, h, _) in goals {
        poses.push((p.x, p.y, h.unwrap_or_else(|| toward(start, p))));
    }
    poses
}

/// Cheapest open tour from vertex 0 over all choices of final goal.
pub fn plan_free_end_tour(graph: &GoalGraph) -> Result<Tour, SimError> {
    let n = graph.len();
    let mut best: Option<Tour> = None;
    for end in 1..n {
        let mut g = graph.clone();
        apply_precedence(&mut g, 0, end);
        if let Ok(tour) = solve_tour(&g, 0, end) {
            if best
                .as_ref()
                .map_or(true, |b| tour.total_cost < b.total_cost)
            {
                best = Some(tour);
            }
        }
    }
    best.ok_or(SimError::Tour(TourError::NoHamiltonianPath))
}

fn clamp_norm(v: Vector2, cap: f64) -> Vector2 {
    let n = v.norm();
    if n > cap {
        v * (cap / n)
    } else {
        v
    }
}

/// Slope angle actually driven this tick, from the ground elevations under
/// the start and end positions. Off-map or missing data reads as flat.
fn tick_slope(world: &WorldModel, from: Point2, to: Point2) -> f64 {
    let run = (to - from).norm();
    if run < 1e-9 {
        return 0.0;
    }
    match (
        world.elevation_at(from.x, from.y),
        world.elevation_at(to.x, to.y),
    ) {
        (Ok(z0), Ok(z1)) => (z1 - z0).atan2(run),
        _ => 0.0,
    }
}

/// Run a scenario end to end and return the log and offline artefacts.
pub fn run_scenario(scenario: &Scenario) -> Result<SimResult, SimError> {
    let seed = scenario.run.seed;
    let world = build_world(scenario)?;
    let bounds = world.bounds();

    // Offline: roadmap over the terrain, goal-to-goal costs, tour, and the
    // reference path the executive will track.
    let poses = resolved_poses(scenario);
    let mut prm_rng = stream(seed, "prm", 0);
    let roadmap = generate_roadmap(&world, &poses, &scenario.goals.prm, &mut prm_rng)?;
    let graph = goal_graph(&roadmap)?;
    let tour = plan_free_end_tour(&graph)?;
    // Tour vertex v >= 1 is scenario goal v - 1; pair accuracies in visit
    // order.
    let accuracies: Vec<f64> = tour.order[1..]
        .iter()
        .map(|&v| scenario.goals.goals[v - 1].2)
        .collect();
    let reference = ReferencePath::from_tour(&tour, accuracies);

    // Harness actors.
    let mut crowd: Option<Crowd> = match &scenario.crowd {
        Some(c) => {
            let policy = match c.policy {
                CrowdPolicyConfig::Cross => GoalPolicy::Cross,
                CrowdPolicyConfig::Hold => GoalPolicy::Hold,
            };
            Some(Crowd::spawn_density(
                c.arena,
                c.density,
                policy,
                CrowdParams::default(),
                c.keepout,
                stream(seed, "crowd", 0),
            )?)
        }
        None => None,
    };
    let model = DetectionModel::preset(&scenario.perception.model, scenario.perception.sigma_pos)
        .ok_or_else(|| SimError::UnknownDetectionModel(scenario.perception.model.clone()))?;
    let mut tracker = TrackSet::new(TrackerParams::default());

    // Control stack configuration.
    let exec = ExecutiveParams {
        dwell_s: scenario.run.dwell_s,
        ..ExecutiveParams::default()
    };
    let cost_params = CostParams {
        interaction_radius: scenario.planner.interaction_radius,
        horizon: scenario.planner.horizon,
        budget_iters: scenario.planner.budget_iters,
        ..CostParams::default()
    };
    let actions: Vec<Action> = match (&scenario.planner.speeds, &scenario.planner.dheadings_deg) {
        (None, None) => action_space(),
        (s, d) => custom_action_space(
            s.as_deref().unwrap_or(&ACTION_SPEEDS),
            d.as_deref().unwrap_or(&ACTION_DHEADINGS_DEG),
        ),
    };
    let energy = scenario.energy;
    let robot_radius = scenario.goals.prm.robot_radius;

    // Robot state.
    let mut position = Point2::new(poses[0].0, poses[0].1);
    let mut heading = poses[0].2;
    let mut velocity = Vector2::zeros();
    let mut mode_state = ModeState::default();
    let mut progress = TourProgress::default();
    let mut active: Option<(Plan, u64)> = None;
    let mut pending: Option<(Plan, u64)> = None;
    let mut next_plan_id: u64 = 1;
    let mut records = Vec::new();
    let mut total_energy_j = 0.0;

    let mut k: u64 = 0;
    loop {
        let t = k as f64 * TICK_DT;
        if t >= scenario.run.duration {
            break;
        }

        // Perceive: ground truth -> detections -> tracks -> occupancy.
        let agent_positions: Vec<Point2> = crowd
            .as_ref()
            .map(|c| c.agents.iter().map(|a| a.position).collect())
            .unwrap_or_default();
        let mut perception_rng = stream(seed, "perception", k);
        let detections = sense(&agent_positions, position, heading, &model, &mut perception_rng);
        let det_points: Vec<Point2> = detections.iter().map(|d| d.position).collect();
        tracker.associate_update(&det_points, t);
        let occupancy = occupancy_snapshot(&world.obstacles, position, robot_radius);
        let occupied = occupancy.occupied_centres();

        // Decide: triggers -> mode -> tour phase.
        let speed = velocity.norm();
        let mut hazard = det_points.clone();
        hazard.extend_from_slice(&occupied);
        let fs = fs_check(&hazard, position, heading, speed);
        let confirmed_positions: Vec<Point2> =
            tracker.confirmed().map(|tr| tr.position()).collect();
        let dyn_needed = dynamic_trigger(&confirmed_positions, &occupied, position, heading, speed);
        mode_state = select_mode(&mode_state, fs, dyn_needed, t, &exec);
        let phase = progress.on_tick(position, &reference, t, &exec);
        if phase == TourPhase::Done {
            break;
        }

        // Act: one velocity command per tick.
        let robot_state = RobotState {
            position,
            heading,
            speed,
            time: t,
        };
        let cmd: VelocityCommand = if phase == TourPhase::Dwelling {
            active = None;
            pending = None;
            VelocityCommand::zero()
        } else {
            match mode_state.mode {
                Mode::FailSafe => VelocityCommand::zero(),
                Mode::LongTerm => {
                    active = None;
                    pending = None;
                    pure_pursuit_step(
                        &robot_state,
                        &PursuitTarget::Path {
                            reference: &reference,
                            goal_idx: progress.goal_idx,
                        },
                        reference.goal_accuracy(progress.goal_idx),
                        &exec,
                    )
                }
                Mode::Dynamic => {
                    // A plan computed last tick becomes available now.
                    if pending.is_some() {
                        active = pending.take();
                    }
                    let (cmd, root) = match &active {
                        None => {
                            // Cold start: brake to half speed while the
                            // first plan is computed.
                            let cmd = VelocityCommand {
                                linear: 0.5 * velocity,
                                angular: 0.0,
                            };
                            (cmd, slow_for_planning(&robot_state, exec.delay_s))
                        }
                        Some((plan, _)) => {
                            let target = plan
                                .steps
                                .iter()
                                .find(|s| s.time > t + 1e-9)
                                .copied()
                                .unwrap_or_else(|| {
                                    *plan.steps.last().expect("plans are never empty")
                                });
                            let linear =
                                clamp_norm((target.position - position) / TICK_DT, exec.v_max);
                            let angular = (exec.heading_gain
                                * wrap_angle(target.heading - heading))
                            .clamp(-exec.omega_max, exec.omega_max);
                            // The next search roots where the active plan
                            // puts the robot one tick from now.
                            let root = RobotState {
                                position: target.position,
                                heading: target.heading,
                                speed: target.speed,
                                time: t + TICK_DT,
                            };
                            (VelocityCommand { linear, angular }, root)
                        }
                    };
                    if mode_state.replan {
                        let local_goal = reference.local_goal(position, progress.goal_idx, &exec);
                        let tracks_cv: Vec<(Point2, Vector2)> = tracker
                            .confirmed()
                            .map(|tr| (tr.position(), tr.velocity()))
                            .collect();
                        let plan = match scenario.planner.kind {
                            PlannerKind::Mcts => {
                                let mut rng = stream(seed, "mcts", k);
                                mcts_plan(
                                    &root,
                                    local_goal,
                                    &tracks_cv,
                                    &occupancy,
                                    Some(&bounds),
                                    &actions,
                                    &cost_params,
                                    &mut rng,
                                )
                            }
                            PlannerKind::PotentialField => pf_plan(
                                &root,
                                local_goal,
                                &tracks_cv,
                                &occupancy,
                                Some(&bounds),
                                &cost_params,
                            ),
                            PlannerKind::FailSafe => {
                                Plan::stop(&root, cost_params.horizon, cost_params.dt)
                            }
                        };
                        pending = Some((plan, next_plan_id));
                        next_plan_id += 1;
                    }
                    cmd
                }
            }
        };

        // Integrate: holonomic base with an acceleration clamp; the heading
        // servo is kinematic (rate-capped, no inertia).
        let dv = clamp_norm(cmd.linear - velocity, ACCEL_LIMIT * TICK_DT);
        velocity += dv;
        let old_position = position;
        position += velocity * TICK_DT;
        heading = wrap_angle(
            heading + cmd.angular.clamp(-exec.omega_max, exec.omega_max) * TICK_DT,
        );
        let new_speed = velocity.norm();

        // Energy from the slope actually driven.
        let slope = tick_slope(&world, old_position, position);
        let power_w = instantaneous_power(&energy, new_speed, slope);
        total_energy_j += power_w * TICK_DT;

        // The crowd reacts to the robot's new state.
        if let Some(c) = crowd.as_mut() {
            let disc = RobotDisc {
                position,
                velocity,
                radius: robot_radius,
            };
            for _ in 0..CROWD_SUBSTEPS {
                c.step(&disc, TICK_DT / CROWD_SUBSTEPS as f64);
            }
        }
        let agents: Vec<Point2> = crowd
            .as_ref()
            .map(|c| c.agents.iter().map(|a| a.position).collect())
            .unwrap_or_default();
        let min_centre_dist = agents
            .iter()
            .map(|p| (p - position).norm())
            .fold(f64::INFINITY, f64::min);

        // Log the tick.
        let plan_id = active
            .as_ref()
            .map(|(_, id)| *id)
            .or_else(|| pending.as_ref().map(|(_, id)| *id))
            .unwrap_or(0);
        let deviation = (position - reference.point_at(reference.project(position))).norm();
        let dist_goal = (reference.goal_point(progress.goal_idx) - position).norm();
        records.push(TickRecord {
            t,
            x: position.x,
            y: position.y,
            heading,
            speed: new_speed,
            mode: mode_state.mode,
            power_w,
            fs,
            plan_id,
            goal_idx: progress.goal_idx,
            dist_goal,
            deviation,
            min_centre_dist,
            agents,
            tracks: tracker
                .tracks
                .iter()
                .map(|tr| (tr.id as u64, tr.position(), tr.confidence))
                .collect(),
        });

        k += 1;
    }

    Ok(SimResult {
        log: RunLog { records },
        tour,
        reference,
        total_energy_j,
    })
}
