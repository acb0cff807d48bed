//! Geometric last-resort stop check: a speed-independent semicircle plus a
//! speed-scaled forward sector. Works on raw points (detections and occupied
//! cell centres) — no tracking or prediction involved, so it cannot be
//! fooled by filter lag.

use crate::geom::{wrap_angle, Point2};

/// Radius (m) of the forward semicircle.
pub const FS_SEMICIRCLE_RADIUS_M: f64 = 2.0;
/// Half-angle (rad) of the speed-scaled forward sector.
pub const FS_SECTOR_HALF_ANGLE: f64 = std::f64::consts::FRAC_PI_4; // 45°

/// True iff any point lies in the forward semicircle (radius 2 m,
/// |bearing| ≤ 90°) or the forward sector (|bearing| ≤ 45°, radius 2 + v).
/// Boundaries are inclusive: grazing contact still stops the robot.
pub fn fs_check(points: &[Point2], robot_position: Point2, robot_heading: f64, v: f64) -> bool {
    let sector_radius = FS_SEMICIRCLE_RADIUS_M + v.max(0.0);
    points.iter().any(|&p| {
        let rel = p - robot_position;
        let range = rel.norm();
        let bearing = wrap_angle(rel.y.atan2(rel.x) - robot_heading).abs();
        let in_semicircle =
            range <= FS_SEMICIRCLE_RADIUS_M && bearing <= std::f64::consts::FRAC_PI_2;
        let in_sector = range <= sector_radius && bearing <= FS_SECTOR_HALF_ANGLE;
        in_semicircle || in_sector
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(range: f64, bearing_deg: f64) -> Point2 {
        let b = bearing_deg.to_radians();
        Point2::new(range * b.cos(), range * b.sin())
    }

    #[test]
    fn obstacle_in_speed_sector_stops() {
        // v=1 → sector radius 3 m; 2.5 m dead ahead is inside.
        assert!(fs_check(&[at(2.5, 0.0)], Point2::new(0.0, 0.0), 0.0, 1.0));
    }

    #[test]
    fn off_axis_obstacle_outside_both_regions_does_not_stop() {
        // v=1, 2.5 m at 80°: outside the 2 m semicircle and outside the 45°
        // sector.
        assert!(!fs_check(&[at(2.5, 80.0)], Point2::new(0.0, 0.0), 0.0, 1.0));
    }

    #[test]
    fn obstacle_directly_abeam_inside_semicircle_stops() {
        assert!(fs_check(&[at(1.9, 90.0)], Point2::new(0.0, 0.0), 0.0, 0.0));
    }

    #[test]
    fn boundaries_are_inclusive() {
        assert!(fs_check(&[at(2.0, 90.0)], Point2::new(0.0, 0.0), 0.0, 0.0));
        assert!(fs_check(&[at(3.0, 45.0)], Point2::new(0.0, 0.0), 0.0, 1.0));
        assert!(!fs_check(
            &[at(3.0 + 1e-9, 0.0)],
            Point2::new(0.0, 0.0),
            0.0,
            1.0
        ));
    }

    #[test]
    fn behind_the_robot_never_stops() {
        assert!(!fs_check(&[at(0.5, 180.0)], Point2::new(0.0, 0.0), 0.0, 1.0));
        assert!(!fs_check(&[at(1.0, -120.0)], Point2::new(0.0, 0.0), 0.0, 1.0));
    }

    #[test]
    fn heading_rotates_the_zones() {
        // Robot heading +y: a point 2.5 m along +y is dead ahead.
        let robot = Point2::new(5.0, 5.0);
        let p = Point2::new(5.0, 7.5);
        assert!(fs_check(&[p], robot, std::f64::consts::FRAC_PI_2, 1.0));
        // Same point with heading +x is abeam and out of range.
        assert!(!fs_check(&[p], robot, 0.0, 1.0));
    }

    #[test]
    fn zero_speed_shrinks_sector_to_semicircle() {
        assert!(!fs_check(&[at(2.2, 0.0)], Point2::new(0.0, 0.0), 0.0, 0.0));
        assert!(fs_check(&[at(2.2, 0.0)], Point2::new(0.0, 0.0), 0.0, 0.3));
    }
}
