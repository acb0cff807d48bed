//! An energy- and crowd-aware navigation stack for a slow field robot.
//!
//! The stack has two planning layers wired together by a mode-switching
//! executive and exercised by a deterministic simulation harness:
//!
//! * **Offline**: a probabilistic roadmap over a heightmap ([`terrain`]),
//!   connected by curvature-bounded clothoid segments ([`clothoid`]) and
//!   weighted by an energy cost-of-motion model ([`energy`]). Goal-to-goal
//!   costs from roadmap shortest paths ([`roadmap`]) feed an asymmetric
//!   travelling-salesman solver that orders the goals into a tour
//!   ([`tour`]).
//! * **Online**: simulated perception with zone-calibrated detection,
//!   Kalman tracking and an occupancy window ([`perception`]), anytime
//!   local planners — Monte Carlo tree search, potential field, and a
//!   fail-safe stop — ([`planners`]), and an executive that switches
//!   between tour tracking, dynamic replanning, and the fail-safe stop
//!   ([`executive`]).
//! * **Harness**: pedestrian crowds driven by reciprocal collision
//!   avoidance ([`crowd`]), a scenario file format ([`scenario`]), the
//!   0.2 s-tick simulation loop ([`sim`]), and per-run metrics with CSV
//!   export ([`runlog`], [`metrics`]).

pub mod clothoid;
pub mod crowd;
pub mod energy;
pub mod executive;
pub mod geom;
pub mod metrics;
pub mod perception;
pub mod planners;
pub mod rng;
pub mod roadmap;
pub mod runlog;
pub mod scenario;
pub mod sim;
pub mod terrain;
pub mod tour;
