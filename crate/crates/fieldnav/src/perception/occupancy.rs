//! Robot-centred occupancy grid over static obstacles, with disc dilation
//! so planners can treat the robot as a point.

use crate::geom::{Point2, Rect};
use crate::terrain::ObstacleSet;

/// Grid side length in cells.
pub const GRID_DIM: usize = 60;
/// Cell edge length (m).
pub const CELL_SIZE_M: f64 = 0.5;

/// Axis-aligned, world-frame occupancy window centred on the robot.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    /// World coordinates of the grid's minimum corner.
    pub origin: Point2,
    /// Row-major `GRID_DIM × GRID_DIM` flags; row index grows with +y,
    /// column index with +x.
    occupied: Vec<bool>,
    /// Dilation radius (m) already applied to `occupied`.
    pub dilation: f64,
}

impl OccupancyGrid {
    /// Grid with every cell free, centred on `robot_position`.
    pub fn empty(robot_position: Point2, dilation: f64) -> Self {
        let half = GRID_DIM as f64 * CELL_SIZE_M / 2.0;
        Self {
            origin: robot_position - crate::geom::Vector2::new(half, half),
            occupied: vec![false; GRID_DIM * GRID_DIM],
            dilation,
        }
    }

    /// World-space rectangle covered by cell `(row, col)`.
    pub fn cell_rect(&self, row: usize, col: usize) -> Rect {
        let x0 = self.origin.x + col as f64 * CELL_SIZE_M;
        let y0 = self.origin.y + row as f64 * CELL_SIZE_M;
        Rect::new(x0, y0, x0 + CELL_SIZE_M, y0 + CELL_SIZE_M)
    }

    /// Centre of cell `(row, col)` in world coordinates.
    pub fn cell_center(&self, row: usize, col: usize) -> Point2 {
        Point2::new(
            self.origin.x + (col as f64 + 0.5) * CELL_SIZE_M,
            self.origin.y + (row as f64 + 0.5) * CELL_SIZE_M,
        )
    }

    /// Cell indices containing a world point, if inside the window.
    pub fn cell_of(&self, p: Point2) -> Option<(usize, usize)> {
        let col = ((p.x - self.origin.x) / CELL_SIZE_M).floor();
        let row = ((p.y - self.origin.y) / CELL_SIZE_M).floor();
        if col < 0.0 || row < 0.0 || col >= GRID_DIM as f64 || row >= GRID_DIM as f64 {
            return None;
        }
        Some((row as usize, col as usize))
    }

    pub fn is_occupied_cell(&self, row: usize, col: usize) -> bool {
        self.occupied[row * GRID_DIM + col]
    }

    /// Whether the world point falls in an occupied cell. Points outside the
    /// window are reported free (the window is the robot's entire local
    /// planning range).
    pub fn is_occupied_at(&self, p: Point2) -> bool {
        match self.cell_of(p) {
            Some((row, col)) => self.is_occupied_cell(row, col),
            None => false,
        }
    }

    /// Centres of all occupied cells.
    pub fn occupied_centres(&self) -> Vec<Point2> {
        let mut out = Vec::new();
        for row in 0..GRID_DIM {
            for col in 0..GRID_DIM {
                if self.is_occupied_cell(row, col) {
                    out.push(self.cell_center(row, col));
                }
            }
        }
        out
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }

    fn set(&mut self, row: usize, col: usize) {
        self.occupied[row * GRID_DIM + col] = true;
    }
}

/// Rasterize the obstacle polygons into a grid centred on the robot, then
/// dilate by a Euclidean disc of `dilation` metres (in whole cells).
pub fn occupancy_snapshot(
    obstacles: &ObstacleSet,
    robot_position: Point2,
    dilation: f64,
) -> OccupancyGrid {
    let mut grid = OccupancyGrid::empty(robot_position, dilation);
    if obstacles.is_empty() {
        return grid;
    }
    let mut raw = Vec::new();
    for row in 0..GRID_DIM {
        for col in 0..GRID_DIM {
            // A cell is occupied only on area contact: testing a hair-shrunk
            // rect keeps obstacles whose edge merely grazes a cell boundary
            // from claiming the neighbouring cell as well.
            let rect = grid.cell_rect(row, col);
            let eps = 1e-9;
            let shrunk = Rect::new(
                rect.min.x + eps,
                rect.min.y + eps,
                rect.max.x - eps,
                rect.max.y - eps,
            );
            if obstacles
                .polygons()
                .iter()
                .any(|p| p.intersects_rect(&shrunk))
            {
                raw.push((row, col));
            }
        }
    }
    let n = (dilation / CELL_SIZE_M).ceil() as i64;
    for (row, col) in raw {
        for di in -n..=n {
            for dj in -n..=n {
                if di * di + dj * dj > n * n {
                    continue;
                }
                let r = row as i64 + di;
                let c = col as i64 + dj;
                if r >= 0 && c >= 0 && (r as usize) < GRID_DIM && (c as usize) < GRID_DIM {
                    grid.set(r as usize, c as usize);
                }
            }
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Polygon;

    fn square(cx: f64, cy: f64, half: f64) -> Polygon {
        Polygon::new(vec![
            Point2::new(cx - half, cy - half),
            Point2::new(cx + half, cy - half),
            Point2::new(cx + half, cy + half),
            Point2::new(cx - half, cy + half),
        ])
        .unwrap()
    }

    /// Rasterization oracle: a cell is raw-occupied iff any of a dense grid
    /// of strictly interior sample points lies in an obstacle (plus the
    /// obstacle's vertices landing strictly inside the cell, to catch tiny
    /// polygons). Interior sampling mirrors the area-contact semantics.
    fn oracle_raw(obstacles: &ObstacleSet, grid: &OccupancyGrid) -> Vec<(usize, usize)> {
        let mut raw = Vec::new();
        for row in 0..GRID_DIM {
            for col in 0..GRID_DIM {
                let rect = grid.cell_rect(row, col);
                let mut hit = false;
                let samples = 11;
                'scan: for a in 0..samples {
                    for b in 0..samples {
                        let p = Point2::new(
                            rect.min.x + rect.width() * (a as f64 + 0.5) / samples as f64,
                            rect.min.y + rect.height() * (b as f64 + 0.5) / samples as f64,
                        );
                        if obstacles.contains(p) {
                            hit = true;
                            break 'scan;
                        }
                    }
                }
                if !hit {
                    for poly in obstacles.polygons() {
                        if poly.vertices().iter().any(|&v| {
                            v.x > rect.min.x
                                && v.x < rect.max.x
                                && v.y > rect.min.y
                                && v.y < rect.max.y
                        }) {
                            hit = true;
                            break;
                        }
                    }
                }
                if hit {
                    raw.push((row, col));
                }
            }
        }
        raw
    }

    fn oracle_dilate(raw: &[(usize, usize)], dilation: f64) -> Vec<bool> {
        let n = (dilation / CELL_SIZE_M).ceil() as i64;
        let mut out = vec![false; GRID_DIM * GRID_DIM];
        for &(row, col) in raw {
            for di in -n..=n {
                for dj in -n..=n {
                    if di * di + dj * dj > n * n {
                        continue;
                    }
                    let r = row as i64 + di;
                    let c = col as i64 + dj;
                    if r >= 0 && c >= 0 && (r as usize) < GRID_DIM && (c as usize) < GRID_DIM {
                        out[r as usize * GRID_DIM + c as usize] = true;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn no_obstacles_means_all_free() {
        let grid = occupancy_snapshot(&ObstacleSet::new(vec![]), Point2::new(3.0, 7.0), 1.5);
        assert_eq!(grid.occupied_count(), 0);
        assert!(!grid.is_occupied_at(Point2::new(3.0, 7.0)));
    }

    #[test]
    fn grid_is_centred_on_the_robot() {
        let robot = Point2::new(12.0, -4.0);
        let grid = occupancy_snapshot(&ObstacleSet::new(vec![]), robot, 1.0);
        assert_eq!(grid.origin, Point2::new(12.0 - 15.0, -4.0 - 15.0));
        let (row, col) = grid.cell_of(robot).unwrap();
        assert_eq!((row, col), (30, 30));
        assert!(grid.cell_of(Point2::new(12.0 + 15.1, -4.0)).is_none());
    }

    #[test]
    fn square_ahead_matches_point_sampling_oracle() {
        let robot = Point2::new(0.0, 0.0);
        // 1×1 m square centred 5 m ahead, dilated by the robot radius.
        let obstacles = ObstacleSet::new(vec![square(5.0, 0.0, 0.5)]);
        let dilation = 1.5;
        let grid = occupancy_snapshot(&obstacles, robot, dilation);

        let raw = oracle_raw(&obstacles, &grid);
        // The square spans exactly 2×2 cells; dilation radius 3 cells turns
        // each into a disc. Candidate block is (2+2·3)² = 64 minus corner
        // rounding.
        assert_eq!(raw.len(), 4);
        let oracle = oracle_dilate(&raw, dilation);
        for row in 0..GRID_DIM {
            for col in 0..GRID_DIM {
                assert_eq!(
                    grid.is_occupied_cell(row, col),
                    oracle[row * GRID_DIM + col],
                    "cell ({row},{col})"
                );
            }
        }
        let count = grid.occupied_count();
        assert!(count < 64, "corner rounding must trim the full block");
        assert!(count > 36, "dilated block implausibly small: {count}");
    }

    #[test]
    fn irregular_polygon_matches_oracle_after_dilation() {
        let robot = Point2::new(2.0, 1.0);
        let poly = Polygon::new(vec![
            Point2::new(4.0, 3.0),
            Point2::new(7.3, 4.1),
            Point2::new(6.1, 6.8),
            Point2::new(3.2, 5.5),
        ])
        .unwrap();
        let obstacles = ObstacleSet::new(vec![poly]);
        let dilation = 1.0;
        let grid = occupancy_snapshot(&obstacles, robot, dilation);
        let oracle = oracle_dilate(&oracle_raw(&obstacles, &grid), dilation);
        let mut mismatches = 0;
        for idx in 0..GRID_DIM * GRID_DIM {
            let (row, col) = (idx / GRID_DIM, idx % GRID_DIM);
            if grid.is_occupied_cell(row, col) != oracle[idx] {
                mismatches += 1;
            }
        }
        // The point-sampling oracle can miss slivers thinner than its sample
        // spacing; the exact rasterizer may only be a superset of it.
        assert!(
            mismatches <= 2,
            "grid and sampling oracle disagree on {mismatches} cells"
        );
        for idx in 0..GRID_DIM * GRID_DIM {
            let (row, col) = (idx / GRID_DIM, idx % GRID_DIM);
            if oracle[idx] {
                assert!(
                    grid.is_occupied_cell(row, col),
                    "exact rasterizer missed a sampled cell ({row},{col})"
                );
            }
        }
    }

    #[test]
    fn obstacle_beyond_window_leaves_grid_untouched() {
        let robot = Point2::new(0.0, 0.0);
        let obstacles = ObstacleSet::new(vec![square(20.0, 0.0, 0.5)]);
        let grid = occupancy_snapshot(&obstacles, robot, 1.5);
        assert_eq!(grid.occupied_count(), 0);
    }

    #[test]
    fn dilated_grid_is_superset_of_undilated() {
        let robot = Point2::new(0.0, 0.0);
        let obstacles = ObstacleSet::new(vec![square(3.0, 2.0, 1.0), square(-4.0, -1.0, 0.7)]);
        let undilated = occupancy_snapshot(&obstacles, robot, 0.0);
        let dilated = occupancy_snapshot(&obstacles, robot, 2.0);
        for row in 0..GRID_DIM {
            for col in 0..GRID_DIM {
                if undilated.is_occupied_cell(row, col) {
                    assert!(dilated.is_occupied_cell(row, col));
                }
            }
        }
        assert!(dilated.occupied_count() > undilated.occupied_count());
    }

    #[test]
    fn occupied_centres_round_trip_through_cell_lookup() {
        let robot = Point2::new(1.0, 1.0);
        let obstacles = ObstacleSet::new(vec![square(5.0, 5.0, 0.4)]);
        let grid = occupancy_snapshot(&obstacles, robot, 0.5);
        let centres = grid.occupied_centres();
        assert!(!centres.is_empty());
        for c in centres {
            assert!(grid.is_occupied_at(c));
        }
    }
}
