//! Field-of-view-gated probabilistic detection of crowd agents.
//!
//! The sensing space is split into three bearing quadrants (front, sides,
//! rear) by three range bands (0–4 m, 4–8 m, 8 m+). Each zone carries a
//! recall (probability a present agent is emitted) and a precision, realized
//! by injecting false positives at the rate that reproduces the configured
//! precision given the configured recall.

use crate::geom::{wrap_angle, Point2, Vector2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Outer radius (m) used when placing false positives in the open-ended
/// far band; mirrors the sensing radius the zone statistics were measured
/// within.
pub const FAR_BAND_PLACEMENT_CAP_M: f64 = 15.0;

/// Bearing quadrant boundaries.
const FRONT_HALF_ANGLE: f64 = std::f64::consts::FRAC_PI_4; // 45°
const SIDE_HALF_ANGLE: f64 = 3.0 * std::f64::consts::FRAC_PI_4; // 135°

/// Recall/precision pair for one (quadrant, band) zone. `precision: None`
/// marks a zone where no detections are ever produced, so precision is
/// undefined and no false positives are injected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneStats {
    pub recall: f64,
    pub precision: Option<f64>,
}

/// Which statistics grid the model was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionMode {
    /// Perfect recall and precision everywhere; only position noise remains.
    Ideal,
    /// The measured field-trial statistics grid.
    Table1,
}

/// Detection statistics over the 3×3 (quadrant × band) zone grid plus
/// isotropic position noise.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionModel {
    pub mode: DetectionMode,
    /// Indexed `zones[quadrant][band]`: quadrant 0 front, 1 sides, 2 rear;
    /// band 0 = 0–4 m, 1 = 4–8 m, 2 = 8 m+.
    pub zones: [[ZoneStats; 3]; 3],
    /// Standard deviation (m) of the isotropic Gaussian position error on
    /// emitted true detections.
    pub sigma_pos: f64,
}

impl DetectionModel {
    /// Perfect detector: every agent emitted everywhere, no false positives,
    /// position noise only.
    pub fn ideal(sigma_pos: f64) -> Self {
        let z = ZoneStats {
            recall: 1.0,
            precision: Some(1.0),
        };
        Self {
            mode: DetectionMode::Ideal,
            zones: [[z; 3]; 3],
            sigma_pos,
        }
    }

    /// The measured statistics of the robot's onboard pipeline: strong ahead,
    /// weaker to the sides, nearly blind behind.
    pub fn swagbot_table1(sigma_pos: f64) -> Self {
        let z = |recall: f64, precision: Option<f64>| ZoneStats { recall, precision };
        Self {
            mode: DetectionMode::Table1,
            zones: [
                [
                    z(0.850, Some(1.00)),
                    z(0.720, Some(1.00)),
                    z(0.057, Some(0.77)),
                ],
                [
                    z(0.642, Some(0.974)),
                    z(0.510, Some(0.982)),
                    z(0.033, Some(0.72)),
                ],
                [z(0.097, Some(0.031)), z(0.168, Some(0.424)), z(0.0, None)],
            ],
            sigma_pos,
        }
    }

    /// Look up a model preset by its scenario-file name.
    pub fn preset(name: &str, sigma_pos: f64) -> Option<Self> {
        match name {
            "ideal" => Some(Self::ideal(sigma_pos)),
            "swagbot-table1" | "table1" => Some(Self::swagbot_table1(sigma_pos)),
            _ => None,
        }
    }

    /// Zone stats for a point at `range` metres and robot-frame bearing
    /// `bearing` radians.
    pub fn zone(&self, range: f64, bearing: f64) -> ZoneStats {
        self.zones[quadrant_index(bearing)][band_index(range)]
    }
}

/// Quadrant index for a robot-frame bearing: 0 front (|φ| ≤ 45°),
/// 1 sides (45° < |φ| ≤ 135°), 2 rear (|φ| > 135°).
pub fn quadrant_index(bearing: f64) -> usize {
    let b = wrap_angle(bearing).abs();
    if b <= FRONT_HALF_ANGLE {
        0
    } else if b <= SIDE_HALF_ANGLE {
        1
    } else {
        2
    }
}

/// Band index for a range: 0 for [0, 4), 1 for [4, 8), 2 for [8, ∞).
pub fn band_index(range: f64) -> usize {
    if range < 4.0 {
        0
    } else if range < 8.0 {
        1
    } else {
        2
    }
}

/// Where a detection came from. Ground truth bookkeeping for evaluation
/// only — the tracker and planners must never read this.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionOrigin {
    /// True detection of the agent at this index in the sensed slice.
    Agent(usize),
    FalsePositive,
}

/// One point detection in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub position: Point2,
    pub origin: DetectionOrigin,
}

/// Simulate one sensing pass over the true agent positions.
///
/// Each agent is emitted with its zone's recall and perturbed by isotropic
/// Gaussian noise; false positives are then injected per zone at rate
/// `recall·(1−precision)/precision` per true agent in the zone, placed
/// uniformly over the zone's area (far band capped at the sensing radius).
pub fn sense(
    agent_positions: &[Point2],
    robot_position: Point2,
    robot_heading: f64,
    model: &DetectionModel,
    rng: &mut ChaCha8Rng,
) -> Vec<Detection> {
    let noise = Normal::new(0.0, model.sigma_pos).expect("sigma_pos must be finite and >= 0");
    let mut detections = Vec::new();
    // Count of true agents per zone drives false-positive injection below.
    let mut zone_counts = [[0usize; 3]; 3];

    for (idx, &pos) in agent_positions.iter().enumerate() {
        let rel = pos - robot_position;
        let range = rel.norm();
        let bearing = wrap_angle(rel.y.atan2(rel.x) - robot_heading);
        let q = quadrant_index(bearing);
        let b = band_index(range);
        zone_counts[q][b] += 1;
        let stats = model.zones[q][b];
        if stats.recall > 0.0 && rng.gen_bool(stats.recall) {
            let dx = noise.sample(rng);
            let dy = noise.sample(rng);
            detections.push(Detection {
                position: pos + Vector2::new(dx, dy),
                origin: DetectionOrigin::Agent(idx),
            });
        }
    }

    for q in 0..3 {
        for b in 0..3 {
            let stats = model.zones[q][b];
            let Some(precision) = stats.precision else {
                continue;
            };
            if zone_counts[q][b] == 0 || precision >= 1.0 || stats.recall <= 0.0 {
                continue;
            }
            let lambda =
                zone_counts[q][b] as f64 * stats.recall * (1.0 - precision) / precision;
            let mut count = lambda.floor() as usize;
            let frac = lambda - lambda.floor();
            if frac > 0.0 && rng.gen_bool(frac) {
                count += 1;
            }
            for _ in 0..count {
                let position =
                    sample_zone_point(q, b, robot_position, robot_heading, rng);
                detections.push(Detection {
                    position,
                    origin: DetectionOrigin::FalsePositive,
                });
            }
        }
    }

    detections
}

/// Uniform point over a zone's area (annulus sector), in world coordinates.
fn sample_zone_point(
    quadrant: usize,
    band: usize,
    robot_position: Point2,
    robot_heading: f64,
    rng: &mut ChaCha8Rng,
) -> Point2 {
    let bearing = match quadrant {
        0 => rng.gen_range(-FRONT_HALF_ANGLE..=FRONT_HALF_ANGLE),
        1 => {
            let mag = rng.gen_range(FRONT_HALF_ANGLE..=SIDE_HALF_ANGLE);
            if rng.gen_bool(0.5) {
                mag
            } else {
                -mag
            }
        }
        _ => {
            let mag = rng.gen_range(SIDE_HALF_ANGLE..=std::f64::consts::PI);
            if rng.gen_bool(0.5) {
                mag
            } else {
                -mag
            }
        }
    };
    let (r0, r1) = match band {
        0 => (0.0, 4.0),
        1 => (4.0, 8.0),
        _ => (8.0, FAR_BAND_PLACEMENT_CAP_M),
    };
    // Area-uniform radius over the annulus.
    let r = rng.gen_range(r0 * r0..=r1 * r1).sqrt();
    let phi = robot_heading + bearing;
    robot_position + Vector2::new(r * phi.cos(), r * phi.sin())
}
