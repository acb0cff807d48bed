//! The robot's belief pipeline: probabilistic detections from ground truth,
//! assignment-based multi-target tracking, track-history extrapolation, and
//! the robot-centred occupancy grid.
//!
//! Everything downstream of [`detection::sense`] operates only on what the
//! robot could plausibly know; ground-truth agent indices are carried on
//! detections purely as evaluation instrumentation and must not inform
//! tracking or planning.

pub mod assignment;
pub mod detection;
pub mod occupancy;
pub mod tracker;

pub use detection::{Detection, DetectionMode, DetectionModel, DetectionOrigin, ZoneStats};
pub use occupancy::{occupancy_snapshot, OccupancyGrid};
pub use tracker::{Track, TrackSet, TrackerParams};
