//! Multi-target tracking: gated minimum-cost association, per-track
//! constant-velocity Kalman filtering, confidence-based lifecycle, and
//! constant-velocity back-extrapolation of short histories.

use super::assignment::{min_cost_assignment, FORBIDDEN};
use crate::geom::{Point2, Vector2};
use nalgebra::{Matrix2, Matrix2x4, Matrix4, Matrix4x2, Vector4};
use std::collections::VecDeque;

/// Number of past positions carried per track and returned by
/// [`extrapolate_history`].
pub const HISTORY_LEN: usize = 12;

/// Tracker tuning. Defaults match the simulated sensor (10 cm position
/// noise) and the 0.2 s tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerParams {
    /// Maximum track-to-detection distance (m) for association.
    pub gate_dist: f64,
    /// Confidence a freshly seeded track starts with.
    pub conf_start: i32,
    /// Confidence cap.
    pub conf_max: i32,
    /// Tracks at or above this confidence are confirmed (visible to
    /// planners).
    pub conf_confirm: i32,
    /// Process-noise acceleration density (m/s²).
    pub sigma_a: f64,
    /// Measurement noise (m, per axis).
    pub sigma_z: f64,
    /// Tick duration (s).
    pub dt: f64,
}

impl Default for TrackerParams {
    fn default() -> Self {
        Self {
            gate_dist: 2.0,
            conf_start: 1,
            conf_max: 5,
            conf_confirm: 2,
            sigma_a: 0.5,
            sigma_z: 0.1,
            dt: 0.2,
        }
    }
}

/// Planar constant-velocity Kalman filter, state `[x, y, vx, vy]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanCv {
    pub state: Vector4<f64>,
    pub covariance: Matrix4<f64>,
}

impl KalmanCv {
    /// Initialize at a measured position with unknown (zero-mean, high
    /// variance) velocity.
    pub fn new(position: Point2, sigma_z: f64) -> Self {
        let mut covariance = Matrix4::zeros();
        covariance[(0, 0)] = sigma_z * sigma_z;
        covariance[(1, 1)] = sigma_z * sigma_z;
        covariance[(2, 2)] = 100.0;
        covariance[(3, 3)] = 100.0;
        Self {
            state: Vector4::new(position.x, position.y, 0.0, 0.0),
            covariance,
        }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.state[0], self.state[1])
    }

    pub fn velocity(&self) -> Vector2 {
        Vector2::new(self.state[2], self.state[3])
    }

    fn transition(dt: f64) -> Matrix4<f64> {
        let mut f = Matrix4::identity();
        f[(0, 2)] = dt;
        f[(1, 3)] = dt;
        f
    }

    fn process_noise(dt: f64, sigma_a: f64) -> Matrix4<f64> {
        let q2 = sigma_a * sigma_a;
        let d4 = dt.powi(4) / 4.0;
        let d3 = dt.powi(3) / 2.0;
        let d2 = dt * dt;
        let mut q = Matrix4::zeros();
        q[(0, 0)] = d4;
        q[(1, 1)] = d4;
        q[(0, 2)] = d3;
        q[(2, 0)] = d3;
        q[(1, 3)] = d3;
        q[(3, 1)] = d3;
        q[(2, 2)] = d2;
        q[(3, 3)] = d2;
        q * q2
    }

    /// Time update by one interval.
    pub fn predict(&mut self, dt: f64, sigma_a: f64) {
        let f = Self::transition(dt);
        self.state = f * self.state;
        self.covariance =
            f * self.covariance * f.transpose() + Self::process_noise(dt, sigma_a);
    }

    /// Measurement update with a position fix.
    pub fn update(&mut self, z: Point2, sigma_z: f64) {
        let h = Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
        let r = Matrix2::identity() * (sigma_z * sigma_z);
        let innovation = nalgebra::Vector2::new(z.x, z.y) - h * self.state;
        let s = h * self.covariance * h.transpose() + r;
        let s_inv = s.try_inverse().expect("innovation covariance is PD");
        let k: Matrix4x2<f64> = self.covariance * h.transpose() * s_inv;
        self.state += k * innovation;
        self.covariance = (Matrix4::identity() - k * h) * self.covariance;
        // Guard the symmetry invariant against floating-point drift.
        self.covariance = (self.covariance + self.covariance.transpose()) * 0.5;
    }
}

/// One tracked object.
#[derive(Debug, Clone)]
pub struct Track {
    pub id: usize,
    pub kalman: KalmanCv,
    pub confidence: i32,
    /// Time (s) of the last associated detection.
    pub last_update: f64,
    /// Most recent filtered positions, oldest first, at tick spacing;
    /// at most [`HISTORY_LEN`] entries.
    pub history: VecDeque<Point2>,
}

impl Track {
    pub fn position(&self) -> Point2 {
        self.kalman.position()
    }

    pub fn velocity(&self) -> Vector2 {
        self.kalman.velocity()
    }

    fn push_history(&mut self) {
        if self.history.len() == HISTORY_LEN {
            self.history.pop_front();
        }
        self.history.push_back(self.position());
    }
}

/// The set of live tracks, updated once per tick.
#[derive(Debug, Clone, Default)]
pub struct TrackSet {
    pub tracks: Vec<Track>,
    next_id: usize,
    pub params: TrackerParams,
}

impl TrackSet {
    pub fn new(params: TrackerParams) -> Self {
        Self {
            tracks: Vec::new(),
            next_id: 0,
            params,
        }
    }

    /// Tracks confirmed enough for planners to act on.
    pub fn confirmed(&self) -> impl Iterator<Item = &Track> {
        self.tracks
            .iter()
            .filter(|t| t.confidence >= self.params.conf_confirm)
    }

    /// One tick: predict all tracks, associate detections by gated
    /// minimum-total-distance assignment, update matched tracks (+1
    /// confidence), decay unmatched tracks (−1), seed tentative tracks from
    /// unmatched detections, and drop tracks whose confidence reaches zero.
    pub fn associate_update(&mut self, detections: &[Point2], t: f64) {
        let p = self.params.clone();
        for track in &mut self.tracks {
            track.kalman.predict(p.dt, p.sigma_a);
        }

        let cost: Vec<Vec<f64>> = self
            .tracks
            .iter()
            .map(|track| {
                detections
                    .iter()
                    .map(|&d| {
                        let dist = (d - track.position()).norm();
                        if dist <= p.gate_dist {
                            dist
                        } else {
                            FORBIDDEN
                        }
                    })
                    .collect()
            })
            .collect();
        let assignment = if self.tracks.is_empty() || detections.is_empty() {
            vec![None; self.tracks.len()]
        } else {
            min_cost_assignment(&cost)
        };

        let mut detection_used = vec![false; detections.len()];
        for (i, track) in self.tracks.iter_mut().enumerate() {
            let matched = assignment[i].filter(|&j| cost[i][j] < FORBIDDEN / 2.0);
            match matched {
                Some(j) => {
                    detection_used[j] = true;
                    track.kalman.update(detections[j], p.sigma_z);
                    track.confidence = (track.confidence + 1).min(p.conf_max);
                    track.last_update = t;
                }
                None => {
                    track.confidence -= 1;
                }
            }
            track.push_history();
        }
        self.tracks.retain(|track| track.confidence > 0);

        for (j, &used) in detection_used.iter().enumerate() {
            if used {
                continue;
            }
            let mut track = Track {
                id: self.next_id,
                kalman: KalmanCv::new(detections[j], p.sigma_z),
                confidence: p.conf_start,
                last_update: t,
                history: VecDeque::with_capacity(HISTORY_LEN),
            };
            self.next_id += 1;
            track.push_history();
            self.tracks.push(track);
        }
    }
}

/// Return exactly [`HISTORY_LEN`] positions at tick spacing, oldest first;
/// a short history is back-filled at the track's constant velocity.
pub fn extrapolate_history(track: &Track, dt: f64) -> Vec<Point2> {
    let mut out = Vec::with_capacity(HISTORY_LEN);
    let known = track.history.len().min(HISTORY_LEN);
    let missing = HISTORY_LEN - known;
    if missing > 0 {
        let earliest = track
            .history
            .front()
            .copied()
            .unwrap_or_else(|| track.position());
        let v = track.velocity();
        for k in (1..=missing).rev() {
            out.push(earliest - v * (k as f64 * dt));
        }
    }
    out.extend(track.history.iter().skip(track.history.len() - known));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn set() -> TrackSet {
        TrackSet::new(TrackerParams::default())
    }

    #[test]
    fn single_detection_seeds_then_confirms_a_track() {
        let mut ts = set();
        ts.associate_update(&[Point2::new(1.0, 2.0)], 0.0);
        assert_eq!(ts.tracks.len(), 1);
        assert_eq!(ts.tracks[0].confidence, 1);
        assert_eq!(ts.confirmed().count(), 0, "tentative tracks stay hidden");
        ts.associate_update(&[Point2::new(1.0, 2.0)], 0.2);
        assert_eq!(ts.tracks.len(), 1);
        assert_eq!(ts.tracks[0].confidence, 2);
        assert_eq!(ts.confirmed().count(), 1);
        assert_abs_diff_eq!(ts.tracks[0].position().x, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn matched_track_converges_to_constant_velocity_truth() {
        let mut ts = set();
        let v = Vector2::new(1.0, -0.5);
        let start = Point2::new(0.0, 0.0);
        for k in 0..40 {
            let t = k as f64 * 0.2;
            ts.associate_update(&[start + v * t], t);
        }
        assert_eq!(ts.tracks.len(), 1);
        let track = &ts.tracks[0];
        assert_abs_diff_eq!(track.velocity().x, 1.0, epsilon = 0.02);
        assert_abs_diff_eq!(track.velocity().y, -0.5, epsilon = 0.02);
        let truth = start + v * (39.0 * 0.2);
        assert!((track.position() - truth).norm() < 0.05);
        assert_eq!(track.confidence, 5, "confidence saturates at the cap");
        // Covariance stays symmetric.
        let p = &track.kalman.covariance;
        assert!((p - p.transpose()).norm() < 1e-12);
    }

    #[test]
    fn unmatched_then_deleted_after_confidence_runs_out() {
        let mut ts = set();
        for k in 0..5 {
            ts.associate_update(&[Point2::new(0.0, 0.0)], k as f64 * 0.2);
        }
        assert_eq!(ts.tracks[0].confidence, 5);
        for k in 5..9 {
            ts.associate_update(&[], k as f64 * 0.2);
            assert_eq!(ts.tracks.len(), 1, "tick {k}");
        }
        assert_eq!(ts.tracks[0].confidence, 1);
        ts.associate_update(&[], 1.8);
        assert!(ts.tracks.is_empty(), "confidence 0 deletes the track");
    }

    #[test]
    fn far_detection_seeds_new_track_instead_of_matching() {
        let mut ts = set();
        ts.associate_update(&[Point2::new(0.0, 0.0)], 0.0);
        ts.associate_update(&[Point2::new(0.0, 0.0)], 0.2);
        // 5 m away with a 2 m gate: must not be associated.
        ts.associate_update(&[Point2::new(5.0, 0.0)], 0.4);
        assert_eq!(ts.tracks.len(), 2);
        assert_eq!(ts.tracks[0].confidence, 1, "old track decayed");
        assert_eq!(ts.tracks[1].confidence, 1, "new tentative track");
        assert_abs_diff_eq!(ts.tracks[1].position().x, 5.0, epsilon = 1e-9);
    }

    #[test]
    fn crossing_tracks_resolve_to_cheaper_permutation() {
        let mut ts = set();
        // Two well-separated tracks moving toward each other.
        let a0 = Point2::new(0.0, 0.0);
        let b0 = Point2::new(4.0, 0.0);
        let va = Vector2::new(1.0, 0.0);
        let vb = Vector2::new(-1.0, 0.0);
        let mut ids = (0, 0);
        for k in 0..10 {
            let t = k as f64 * 0.2;
            let a = a0 + va * t;
            let b = b0 + vb * t;
            ts.associate_update(&[a, b], t);
            if k == 0 {
                ids = (ts.tracks[0].id, ts.tracks[1].id);
            }
        }
        // After crossing, identity follows the consistent motion.
        assert_eq!(ts.tracks.len(), 2);
        let ta = ts.tracks.iter().find(|t| t.id == ids.0).unwrap();
        let tb = ts.tracks.iter().find(|t| t.id == ids.1).unwrap();
        assert!(ta.velocity().x > 0.5, "track A keeps +x motion");
        assert!(tb.velocity().x < -0.5, "track B keeps −x motion");
    }

    #[test]
    fn identity_stable_over_500_ticks_without_switches() {
        let mut ts = set();
        // Four noiseless, well-separated agents on fixed courses.
        let starts = [
            Point2::new(0.0, 0.0),
            Point2::new(20.0, 0.0),
            Point2::new(0.0, 20.0),
            Point2::new(20.0, 20.0),
        ];
        let vels = [
            Vector2::new(0.5, 0.1),
            Vector2::new(-0.4, 0.2),
            Vector2::new(0.3, -0.2),
            Vector2::new(-0.2, -0.3),
        ];
        let mut id_of: Option<Vec<usize>> = None;
        for k in 0..500 {
            let t = k as f64 * 0.2;
            let dets: Vec<Point2> = starts
                .iter()
                .zip(&vels)
                .map(|(&s, &v)| s + v * (t / 10.0)) // slow drift keeps them apart
                .collect();
            ts.associate_update(&dets, t);
            assert_eq!(ts.tracks.len(), 4, "tick {k}");
            // Identify each track by nearest truth and demand stability.
            let mut assigned = Vec::new();
            for d in &dets {
                let best = ts
                    .tracks
                    .iter()
                    .min_by(|x, y| {
                        (x.position() - d)
                            .norm()
                            .total_cmp(&(y.position() - d).norm())
                    })
                    .unwrap();
                assigned.push(best.id);
            }
            match &id_of {
                None => id_of = Some(assigned),
                Some(expect) => assert_eq!(expect, &assigned, "ID switch at tick {k}"),
            }
        }
    }

    #[test]
    fn track_survives_half_second_detection_gap_with_same_id() {
        let mut ts = set();
        let v = Vector2::new(1.0, 0.0);
        let start = Point2::new(0.0, 0.0);
        let mut tick = 0;
        for _ in 0..10 {
            let t = tick as f64 * 0.2;
            ts.associate_update(&[start + v * t], t);
            tick += 1;
        }
        let id = ts.tracks[0].id;
        // 0.5 s ≈ 2–3 ticks of silence (occlusion).
        for _ in 0..3 {
            let t = tick as f64 * 0.2;
            ts.associate_update(&[], t);
            tick += 1;
        }
        assert_eq!(ts.tracks.len(), 1, "track must survive the gap");
        for _ in 0..3 {
            let t = tick as f64 * 0.2;
            ts.associate_update(&[start + v * t], t);
            tick += 1;
        }
        assert_eq!(ts.tracks.len(), 1);
        assert_eq!(ts.tracks[0].id, id, "identity kept through occlusion");
        assert_eq!(ts.confirmed().count(), 1);
    }

    #[test]
    fn assignment_beats_greedy_on_crossing_configuration() {
        // Configuration where greedy nearest-first pairs wrongly: the
        // optimal assignment is verified against both permutations.
        let mut ts = set();
        ts.associate_update(&[Point2::new(0.0, 0.0), Point2::new(1.5, 0.0)], 0.0);
        let dets = [Point2::new(0.8, 0.0), Point2::new(1.9, 0.0)];
        ts.associate_update(&dets, 0.2);
        // Permutation costs: identity 0.8+0.4=1.2, swap 1.9+0.7=2.6.
        let t0 = &ts.tracks[0];
        let t1 = &ts.tracks[1];
        assert!((t0.position() - dets[0]).norm() < 0.5);
        assert!((t1.position() - dets[1]).norm() < 0.5);
        assert_eq!(t0.confidence, 2);
        assert_eq!(t1.confidence, 2);
    }

    #[test]
    fn history_ring_is_bounded_and_ordered() {
        let mut ts = set();
        for k in 0..30 {
            let t = k as f64 * 0.2;
            ts.associate_update(&[Point2::new(t, 0.0)], t);
        }
        let h = &ts.tracks[0].history;
        assert_eq!(h.len(), HISTORY_LEN);
        for w in h.iter().collect::<Vec<_>>().windows(2) {
            assert!(w[0].x < w[1].x, "history must be oldest-first");
        }
    }

    #[test]
    fn full_history_extrapolates_unchanged() {
        let mut ts = set();
        for k in 0..20 {
            let t = k as f64 * 0.2;
            ts.associate_update(&[Point2::new(t, 1.0)], t);
        }
        let track = &ts.tracks[0];
        let ext = extrapolate_history(track, 0.2);
        assert_eq!(ext.len(), HISTORY_LEN);
        let direct: Vec<Point2> = track.history.iter().copied().collect();
        assert_eq!(ext, direct);
    }

    #[test]
    fn single_observation_backfills_along_negative_velocity() {
        // A track with one observed position and a hand-set velocity of
        // (1, 0) must back-fill 11 positions spaced 0.2 m along −x.
        let mut track = Track {
            id: 0,
            kalman: KalmanCv::new(Point2::new(10.0, 5.0), 0.1),
            confidence: 1,
            last_update: 0.0,
            history: VecDeque::from([Point2::new(10.0, 5.0)]),
        };
        track.kalman.state[2] = 1.0;
        track.kalman.state[3] = 0.0;
        let ext = extrapolate_history(&track, 0.2);
        assert_eq!(ext.len(), 12);
        for (k, p) in ext.iter().enumerate() {
            let expect_x = 10.0 - 0.2 * (11 - k) as f64;
            assert_abs_diff_eq!(p.x, expect_x, epsilon = 1e-12);
            assert_abs_diff_eq!(p.y, 5.0, epsilon = 1e-12);
        }
        assert_eq!(ext[11], Point2::new(10.0, 5.0));
    }

    #[test]
    fn zero_velocity_single_observation_gives_identical_positions() {
        let track = Track {
            id: 0,
            kalman: KalmanCv::new(Point2::new(3.0, 4.0), 0.1),
            confidence: 1,
            last_update: 0.0,
            history: VecDeque::from([Point2::new(3.0, 4.0)]),
        };
        let ext = extrapolate_history(&track, 0.2);
        assert_eq!(ext, vec![Point2::new(3.0, 4.0); 12]);
    }

    #[test]
    fn noisy_measurements_are_smoothed_toward_truth() {
        let mut rng = crate::rng::stream(22, "tracker", 0);
        let mut ts = set();
        let v = Vector2::new(0.8, 0.3);
        let start = Point2::new(0.0, 0.0);
        let mut tail_err_sum = 0.0;
        let mut tail_n = 0;
        for k in 0..100 {
            let t = k as f64 * 0.2;
            let truth = start + v * t;
            let noisy = truth
                + Vector2::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
            ts.associate_update(&[noisy], t);
            if k >= 70 {
                tail_err_sum += (ts.tracks[0].position() - truth).norm();
                tail_n += 1;
            }
        }
        // Raw measurements have ~0.16 m mean planar error; the filter must
        // do meaningfully better in steady state.
        let mean_err = tail_err_sum / tail_n as f64;
        assert!(mean_err < 0.12, "filtered error too large: {mean_err}");
        // Differencing raw measurements would give ~0.8 m/s of velocity
        // error; the filter's steady-state wobble is an order better.
        let vel_err = (ts.tracks[0].velocity() - v).norm();
        assert!(vel_err < 0.15, "velocity estimate off by {vel_err}");
    }
}
