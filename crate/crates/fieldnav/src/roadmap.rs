//! Probabilistic roadmap construction over a terrain world.
//!
//! Vertices are stable, collision-free surface poses (uniform rejection
//! sampling plus the mission goals); arcs are curvature-bounded clothoid
//! segments checked for clearance and stability at subsampled stations, and
//! weighted by the energy cost of traversing them at a nominal speed. Arcs
//! are directed: on sloped ground the uphill direction costs more than the
//! downhill one.
//!
//! Shortest paths between goals (Dijkstra over the directed arcs) condense
//! the roadmap into a [`GoalGraph`](crate::tour::GoalGraph) for tour
//! ordering.

use crate::clothoid::ClothoidSegment;
use crate::energy::{edge_energy, EnergyParams};
use crate::terrain::{SurfacePose, WorldModel};
use crate::tour::GoalGraph;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use thiserror::Error;

/// Tuning parameters for roadmap construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PrmParams {
    /// Number of uniformly sampled vertices (goals are added on top).
    pub n_samples: usize,
    /// Maximum 3D distance (m) between vertices considered for connection.
    pub r_conn: f64,
    /// Curvature bound (1/m) every retained arc must satisfy.
    pub kappa_max: f64,
    /// Spacing (m) of the stations where arcs are collision- and
    /// stability-checked; also the reference polyline resolution.
    pub subsample_step: f64,
    /// Extra clearance margin (m) added to the robot radius.
    pub clearance_margin: f64,
    /// Robot body radius (m).
    pub robot_radius: f64,
    /// Speed (m/s) assumed when converting arcs to energy costs.
    pub nominal_speed: f64,
}

impl Default for PrmParams {
    fn default() -> Self {
        Self {
            n_samples: 200,
            r_conn: 4.0,
            kappa_max: 0.70,
            subsample_step: 0.5,
            clearance_margin: 0.5,
            robot_radius: 1.5,
            nominal_speed: 0.9,
        }
    }
}

impl PrmParams {
    /// Clearance radius used for every free-space query.
    pub fn clearance(&self) -> f64 {
        self.robot_radius + self.clearance_margin
    }
}

/// Errors from roadmap construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RoadmapError {
    /// A mission goal failed the free-space or stability check.
    #[error("goal {index} is blocked (not free and stable with the required clearance)")]
    GoalBlocked { index: usize },
    /// Rejection sampling gave up (more than 1000 rejections per requested
    /// sample).
    #[error("environment too constrained: {accepted} of {requested} samples after {attempts} attempts")]
    SamplingExhausted {
        accepted: usize,
        requested: usize,
        attempts: usize,
    },
    /// No path between two goals exists in the roadmap.
    #[error("goal {from} cannot reach goal {to} in the roadmap")]
    GoalsUnreachable { from: usize, to: usize },
}

/// Why a candidate arc was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcRejection {
    /// The G1 fit did not converge (counted separately from geometric
    /// rejections).
    FitFailed,
    /// Curvature bound exceeded somewhere along the segment.
    Curvature,
    /// A subsampled station failed the clearance check.
    Collision,
    /// A subsampled station had an unstable surface pose.
    Unstable,
}

/// A directed roadmap arc.
#[derive(Debug, Clone)]
pub struct RoadmapArc {
    pub to: usize,
    /// Energy cost (J) of traversing the arc at the nominal speed.
    pub cost: f64,
    /// 3D points spaced at the subsample step, endpoints included.
    pub polyline: Vec<[f64; 3]>,
    pub segment: ClothoidSegment,
}

/// A sampled roadmap: stable poses plus directed, checked, costed arcs.
#[derive(Debug, Clone)]
pub struct Roadmap {
    pub vertices: Vec<SurfacePose>,
    /// `adjacency[i]` lists the arcs leaving vertex `i`.
    pub adjacency: Vec<Vec<RoadmapArc>>,
    /// Indices of the goal vertices (appended after the samples, in input
    /// order).
    pub goal_indices: Vec<usize>,
}

impl Roadmap {
    /// Minimum-cost path between two vertices, as (total cost, vertex
    /// sequence). `None` when unreachable.
    pub fn shortest_path(&self, from: usize, to: usize) -> Option<(f64, Vec<usize>)> {
        let adj: Vec<Vec<(usize, f64)>> = self
            .adjacency
            .iter()
            .map(|arcs| arcs.iter().map(|a| (a.to, a.cost)).collect())
            .collect();
        dijkstra(&adj, from, to)
    }

    fn arc(&self, from: usize, to: usize) -> Option<&RoadmapArc> {
        self.adjacency[from].iter().find(|a| a.to == to)
    }
}

/// Validity test shared by sampling and goal admission: inside the map with
/// clearance, and standing stably on the local surface.
fn pose_is_valid(world: &WorldModel, x: f64, y: f64, heading: f64, params: &PrmParams) -> Option<SurfacePose> {
    if !world.is_free(x, y, params.clearance()) {
        return None;
    }
    let pose = world.surface_pose(x, y, heading).ok()?;
    if !pose.is_stable(world.tilt_max) {
        return None;
    }
    Some(pose)
}

/// Uniform rejection sampling of `n` valid poses over the world bounds.
/// Headings are uniform on [0, 2π). Fails after 1000·n rejections.
pub fn sample_free(
    world: &WorldModel,
    n: usize,
    params: &PrmParams,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<SurfacePose>, RoadmapError> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let bounds = world.heightmap.bounds();
    let mut out = Vec::with_capacity(n);
    let max_attempts = 1000 * n;
    let mut attempts = 0;
    while out.len() < n {
        if attempts >= max_attempts {
            return Err(RoadmapError::SamplingExhausted {
                accepted: out.len(),
                requested: n,
                attempts,
            });
        }
        attempts += 1;
        let x = rng.gen_range(bounds.min.x..=bounds.max.x);
        let y = rng.gen_range(bounds.min.y..=bounds.max.y);
        let heading = rng.gen_range(0.0..std::f64::consts::TAU);
        if let Some(pose) = pose_is_valid(world, x, y, heading, params) {
            out.push(pose);
        }
    }
    Ok(out)
}

/// Try to connect two poses with a clothoid arc: fit, curvature bound, and
/// clearance + stability at stations spaced by the subsample step.
///
/// On success returns the segment, its 3D reference polyline, and the energy
/// cost at the nominal speed.
pub fn connect_clothoid(
    from: &SurfacePose,
    to: &SurfacePose,
    world: &WorldModel,
    params: &PrmParams,
) -> Result<(ClothoidSegment, Vec<[f64; 3]>, f64), ArcRejection> {
    let seg = ClothoidSegment::fit_g1((from.x, from.y, from.yaw), (to.x, to.y, to.yaw))
        .map_err(|_| ArcRejection::FitFailed)?;
    if seg.max_abs_curvature() > params.kappa_max {
        return Err(ArcRejection::Curvature);
    }
    let stations = seg.sample_s(params.subsample_step);
    let mut polyline = Vec::with_capacity(stations.len());
    for s in stations {
        let (x, y) = seg.point_at(s);
        if !world.is_free(x, y, params.clearance()) {
            return Err(ArcRejection::Collision);
        }
        let pose = world
            .surface_pose(x, y, seg.heading_at(s))
            .map_err(|_| ArcRejection::Collision)?;
        if !pose.is_stable(world.tilt_max) {
            return Err(ArcRejection::Unstable);
        }
        polyline.push([x, y, pose.z]);
    }
    let cost = edge_energy(&EnergyParams::default(), &polyline, params.nominal_speed);
    Ok((seg, polyline, cost))
}

/// Build the roadmap: `n_samples` rejection samples plus the goals (appended
/// in input order), then directed arcs both ways between every vertex pair
/// within the connection radius that passes the arc checks.
///
/// Goals are given as `(x, y, heading)`.
pub fn generate_roadmap(
    world: &WorldModel,
    goals: &[(f64, f64, f64)],
    params: &PrmParams,
    rng: &mut ChaCha8Rng,
) -> Result<Roadmap, RoadmapError> {
    let mut vertices = sample_free(world, params.n_samples, params, rng)?;
    let mut goal_indices = Vec::with_capacity(goals.len());
    for (index, &(x, y, heading)) in goals.iter().enumerate() {
        let pose = pose_is_valid(world, x, y, heading, params)
            .ok_or(RoadmapError::GoalBlocked { index })?;
        goal_indices.push(vertices.len());
        vertices.push(pose);
    }

    let n = vertices.len();
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let a = &vertices[i];
            let b = &vertices[j];
            let d3 = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt();
            if d3 > params.r_conn {
                continue;
            }
            if let Ok((segment, polyline, cost)) = connect_clothoid(a, b, world, params) {
                adjacency[i].push(RoadmapArc {
                    to: j,
                    cost,
                    polyline,
                    segment,
                });
            }
        }
    }

    Ok(Roadmap {
        vertices,
        adjacency,
        goal_indices,
    })
}

/// Condense the roadmap to the goal graph: pairwise minimum-cost paths
/// between all ordered goal pairs, with the concatenated reference polylines.
pub fn goal_graph(roadmap: &Roadmap) -> Result<GoalGraph, RoadmapError> {
    let n = roadmap.goal_indices.len();
    let mut cost = vec![vec![f64::INFINITY; n]; n];
    let mut paths = vec![vec![Vec::new(); n]; n];
    let positions: Vec<[f64; 3]> = roadmap
        .goal_indices
        .iter()
        .map(|&v| {
            let p = &roadmap.vertices[v];
            [p.x, p.y, p.z]
        })
        .collect();

    for gi in 0..n {
        for gj in 0..n {
            if gi == gj {
                cost[gi][gj] = 0.0;
                continue;
            }
            let (c, vertex_path) = roadmap
                .shortest_path(roadmap.goal_indices[gi], roadmap.goal_indices[gj])
                .ok_or(RoadmapError::GoalsUnreachable { from: gi, to: gj })?;
            cost[gi][gj] = c;
            let mut polyline: Vec<[f64; 3]> = Vec::new();
            for pair in vertex_path.windows(2) {
                let arc = roadmap
                    .arc(pair[0], pair[1])
                    .expect("path edges exist in the roadmap");
                let skip = usize::from(!polyline.is_empty());
                polyline.extend_from_slice(&arc.polyline[skip..]);
            }
            paths[gi][gj] = polyline;
        }
    }

    Ok(GoalGraph {
        cost,
        paths,
        positions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    cost: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want the cheapest first.
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra over an adjacency list of `(neighbour, cost)` pairs. Returns the
/// minimum total cost and the vertex sequence, or `None` if unreachable.
pub fn dijkstra(
    adjacency: &[Vec<(usize, f64)>],
    from: usize,
    to: usize,
) -> Option<(f64, Vec<usize>)> {
    let n = adjacency.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[from] = 0.0;
    heap.push(HeapEntry {
        cost: 0.0,
        node: from,
    });
    while let Some(HeapEntry { cost, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        if node == to {
            break;
        }
        for &(next, w) in &adjacency[node] {
            let cand = cost + w;
            if cand < dist[next] {
                dist[next] = cand;
                prev[next] = node;
                heap.push(HeapEntry {
                    cost: cand,
                    node: next,
                });
            }
        }
    }
    if !dist[to].is_finite() {
        return None;
    }
    let mut path = vec![to];
    let mut cur = to;
    while cur != from {
        cur = prev[cur];
        path.push(cur);
    }
    path.reverse();
    Some((dist[to], path))
}
