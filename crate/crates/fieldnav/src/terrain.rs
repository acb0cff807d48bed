//! Ground model: gridded elevation, polygonal keep-out regions, and the
//! stability test used to validate candidate robot poses.
//!
//! Elevations live on a regular grid of *nodes* in an ESRI-style ASCII
//! format (`ncols`/`nrows`/`xllcorner`/`yllcorner`/`cellsize`/
//! `nodata_value` header, then rows of values north-to-south). A node at
//! column `j`, south-row `i` sits at `(xll + j·cell, yll + i·cell)`;
//! queries between nodes interpolate bilinearly. Cells touching a nodata
//! node are intraversable.

use nalgebra::Matrix3;
use nalgebra::Vector3;
use thiserror::Error;

use crate::geom::{wrap_angle, Point2, Polygon, Rect, Vector2};

/// Default stability threshold on total ground tilt, radians.
pub const DEFAULT_TILT_MAX_RAD: f64 = 0.52;
/// Radius of the neighbourhood used for the ground-plane fit, metres.
pub const PLANE_FIT_RADIUS_M: f64 = 1.0;

#[derive(Debug, Error)]
pub enum TerrainError {
    #[error("point ({x:.3}, {y:.3}) is outside the heightmap bounds")]
    OutOfBounds { x: f64, y: f64 },
    #[error("no elevation data at ({x:.3}, {y:.3})")]
    NoData { x: f64, y: f64 },
    #[error("heightmap parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Regular grid of ground elevations.
#[derive(Debug, Clone)]
pub struct Heightmap {
    ncols: usize,
    nrows: usize,
    xll: f64,
    yll: f64,
    cellsize: f64,
    nodata: f64,
    /// Row-major, first row northernmost (as in the file format).
    values: Vec<f64>,
}

impl Heightmap {
    /// Builds a map by evaluating `f(x, y)` at every node. Handy for
    /// synthetic worlds in tests and scenarios.
    pub fn from_fn(
        ncols: usize,
        nrows: usize,
        xll: f64,
        yll: f64,
        cellsize: f64,
        f: impl Fn(f64, f64) -> f64,
    ) -> Self {
        assert!(ncols >= 2 && nrows >= 2, "grid needs at least 2x2 nodes");
        assert!(cellsize > 0.0);
        let mut values = Vec::with_capacity(ncols * nrows);
        for i in 0..nrows {
            let y = yll + (nrows - 1 - i) as f64 * cellsize;
            for j in 0..ncols {
                let x = xll + j as f64 * cellsize;
                values.push(f(x, y));
            }
        }
        Self {
            ncols,
            nrows,
            xll,
            yll,
            cellsize,
            nodata: -9999.0,
            values,
        }
    }

    /// Parses the ASCII grid format. Header keys are case-insensitive;
    /// `nodata_value` is optional (default −9999).
    pub fn parse_ascii_grid(text: &str) -> Result<Self, TerrainError> {
        let mut ncols = None;
        let mut nrows = None;
        let mut xll = None;
        let mut yll = None;
        let mut cellsize = None;
        let mut nodata = -9999.0;
        let mut values = Vec::new();
        let mut in_header = true;
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let mut tokens = trimmed.split_whitespace();
            let first = tokens.next().unwrap();
            if in_header && first.chars().next().is_some_and(|c| c.is_alphabetic()) {
                let value_tok = tokens.next().ok_or_else(|| TerrainError::Parse {
                    line: line_no,
                    reason: format!("header key `{first}` has no value"),
                })?;
                let value: f64 = value_tok.parse().map_err(|_| TerrainError::Parse {
                    line: line_no,
                    reason: format!("cannot parse `{value_tok}` as a number"),
                })?;
                match first.to_ascii_lowercase().as_str() {
                    "ncols" => ncols = Some(value as usize),
                    "nrows" => nrows = Some(value as usize),
                    "xllcorner" => xll = Some(value),
                    "yllcorner" => yll = Some(value),
                    "cellsize" => cellsize = Some(value),
                    "nodata_value" => nodata = value,
                    other => {
                        return Err(TerrainError::Parse {
                            line: line_no,
                            reason: format!("unknown header key `{other}`"),
                        })
                    }
                }
            } else {
                in_header = false;
                for tok in std::iter::once(first).chain(tokens) {
                    let v: f64 = tok.parse().map_err(|_| TerrainError::Parse {
                        line: line_no,
                        reason: format!("cannot parse `{tok}` as an elevation"),
                    })?;
                    values.push(v);
                }
            }
        }
        let missing = |key: &str| TerrainError::Parse {
            line: 0,
            reason: format!("missing header key `{key}`"),
        };
        let ncols = ncols.ok_or_else(|| missing("ncols"))?;
        let nrows = nrows.ok_or_else(|| missing("nrows"))?;
        let xll = xll.ok_or_else(|| missing("xllcorner"))?;
        let yll = yll.ok_or_else(|| missing("yllcorner"))?;
        let cellsize = cellsize.ok_or_else(|| missing("cellsize"))?;
        if ncols < 2 || nrows < 2 {
            return Err(TerrainError::Parse {
                line: 0,
                reason: format!("grid must be at least 2x2 nodes, got {ncols}x{nrows}"),
            });
        }
        if cellsize <= 0.0 {
            return Err(TerrainError::Parse {
                line: 0,
                reason: format!("cellsize must be positive, got {cellsize}"),
            });
        }
        if values.len() != ncols * nrows {
            return Err(TerrainError::Parse {
                line: 0,
                reason: format!(
                    "expected {} values ({ncols}x{nrows}), got {}",
                    ncols * nrows,
                    values.len()
                ),
            });
        }
        Ok(Self {
            ncols,
            nrows,
            xll,
            yll,
            cellsize,
            nodata,
            values,
        })
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn cellsize(&self) -> f64 {
        self.cellsize
    }

    /// World-frame extent covered by the node grid.
    pub fn bounds(&self) -> Rect {
        Rect::new(
            self.xll,
            self.yll,
            self.xll + (self.ncols - 1) as f64 * self.cellsize,
            self.yll + (self.nrows - 1) as f64 * self.cellsize,
        )
    }

    pub fn in_bounds(&self, x: f64, y: f64) -> bool {
        self.bounds().contains(Point2::new(x, y))
    }

    /// Node value at `(col, row)` with row 0 the southernmost.
    fn node(&self, col: usize, row_south: usize) -> f64 {
        let row_north = self.nrows - 1 - row_south;
        self.values[row_north * self.ncols + col]
    }

    fn node_is_nodata(&self, col: usize, row_south: usize) -> bool {
        self.node(col, row_south) == self.nodata
    }

    fn node_xy(&self, col: usize, row_south: usize) -> (f64, f64) {
        (
            self.xll + col as f64 * self.cellsize,
            self.yll + row_south as f64 * self.cellsize,
        )
    }

    /// Indices of the interpolation cell containing `(x, y)` and the
    /// fractional position inside it.
    fn cell_of(&self, x: f64, y: f64) -> Result<(usize, usize, f64, f64), TerrainError> {
        if !self.in_bounds(x, y) || !x.is_finite() || !y.is_finite() {
            return Err(TerrainError::OutOfBounds { x, y });
        }
        let u = (x - self.xll) / self.cellsize;
        let v = (y - self.yll) / self.cellsize;
        let j = (u.floor() as usize).min(self.ncols - 2);
        let i = (v.floor() as usize).min(self.nrows - 2);
        Ok((j, i, u - j as f64, v - i as f64))
    }

    /// Bilinear ground elevation at `(x, y)`.
    pub fn elevation_at(&self, x: f64, y: f64) -> Result<f64, TerrainError> {
        let (j, i, fx, fy) = self.cell_of(x, y)?;
        let z00 = self.node(j, i);
        let z10 = self.node(j + 1, i);
        let z01 = self.node(j, i + 1);
        let z11 = self.node(j + 1, i + 1);
        if [z00, z10, z01, z11].contains(&self.nodata) {
            return Err(TerrainError::NoData { x, y });
        }
        Ok((1.0 - fx) * (1.0 - fy) * z00 + fx * (1.0 - fy) * z10
            + (1.0 - fx) * fy * z01
            + fx * fy * z11)
    }

    /// True when any node within `radius` of `(x, y)` (or any corner of
    /// the containing cell) carries the nodata marker.
    pub fn nodata_within(&self, x: f64, y: f64, radius: f64) -> bool {
        let Ok((j, i, _, _)) = self.cell_of(x, y) else {
            return true;
        };
        if self.node_is_nodata(j, i)
            || self.node_is_nodata(j + 1, i)
            || self.node_is_nodata(j, i + 1)
            || self.node_is_nodata(j + 1, i + 1)
        {
            return true;
        }
        if radius <= 0.0 {
            return false;
        }
        let reach = (radius / self.cellsize).ceil() as isize;
        let r2 = radius * radius;
        for di in -reach..=reach {
            for dj in -reach..=reach {
                let col = j as isize + dj;
                let row = i as isize + di;
                if col < 0 || row < 0 || col >= self.ncols as isize || row >= self.nrows as isize {
                    continue;
                }
                let (nx, ny) = self.node_xy(col as usize, row as usize);
                if (nx - x).powi(2) + (ny - y).powi(2) <= r2
                    && self.node_is_nodata(col as usize, row as usize)
                {
                    return true;
                }
            }
        }
        false
    }

    /// Least-squares ground-plane gradient `(dz/dx, dz/dy)` fitted over
    /// nodes within [`PLANE_FIT_RADIUS_M`] of `(x, y)`; falls back to the
    /// four corners of the containing cell on coarse grids.
    fn plane_gradient(&self, x: f64, y: f64) -> Result<Vector2, TerrainError> {
        let (j, i, _, _) = self.cell_of(x, y)?;
        let reach = (PLANE_FIT_RADIUS_M / self.cellsize).ceil() as isize;
        let r2 = PLANE_FIT_RADIUS_M * PLANE_FIT_RADIUS_M;
        let mut pts: Vec<(f64, f64, f64)> = Vec::new();
        for di in -reach..=(reach + 1) {
            for dj in -reach..=(reach + 1) {
                let col = j as isize + dj;
                let row = i as isize + di;
                if col < 0 || row < 0 || col >= self.ncols as isize || row >= self.nrows as isize {
                    continue;
                }
                let (col, row) = (col as usize, row as usize);
                let (nx, ny) = self.node_xy(col, row);
                if (nx - x).powi(2) + (ny - y).powi(2) <= r2 && !self.node_is_nodata(col, row) {
                    pts.push((nx, ny, self.node(col, row)));
                }
            }
        }
        if pts.len() < 3 {
            pts.clear();
            for (dj, di) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                let (col, row) = (j + dj, i + di);
                if self.node_is_nodata(col, row) {
                    return Err(TerrainError::NoData { x, y });
                }
                let (nx, ny) = self.node_xy(col, row);
                pts.push((nx, ny, self.node(col, row)));
            }
        }
        // Normal equations for z = a·x + b·y + c, centred on the query
        // point for conditioning.
        let (mut sxx, mut sxy, mut syy, mut sx, mut sy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let (mut sxz, mut syz, mut sz) = (0.0, 0.0, 0.0);
        let n = pts.len() as f64;
        for &(px, py, pz) in &pts {
            let (dx, dy) = (px - x, py - y);
            sxx += dx * dx;
            sxy += dx * dy;
            syy += dy * dy;
            sx += dx;
            sy += dy;
            sxz += dx * pz;
            syz += dy * pz;
            sz += pz;
        }
        let m = Matrix3::new(sxx, sxy, sx, sxy, syy, sy, sx, sy, n);
        let rhs = Vector3::new(sxz, syz, sz);
        let sol = m
            .lu()
            .solve(&rhs)
            .ok_or(TerrainError::NoData { x, y })?;
        Ok(Vector2::new(sol[0], sol[1]))
    }
}

/// Polygonal keep-out regions.
#[derive(Debug, Clone, Default)]
pub struct ObstacleSet {
    polygons: Vec<Polygon>,
}

impl ObstacleSet {
    pub fn new(polygons: Vec<Polygon>) -> Self {
        Self { polygons }
    }

    pub fn polygons(&self) -> &[Polygon] {
        &self.polygons
    }

    pub fn is_empty(&self) -> bool {
        self.polygons.is_empty()
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.polygons.iter().any(|poly| poly.contains(p))
    }

    /// Exact clearance to the nearest obstacle (zero inside one,
    /// +infinity when the set is empty).
    pub fn clearance(&self, p: Point2) -> f64 {
        self.polygons
            .iter()
            .map(|poly| poly.clearance(p))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A ground pose: position with interpolated elevation plus the
/// orientation of the fitted ground plane under a given yaw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Rotation about the forward axis, radians (positive = right side up-slope).
    pub roll: f64,
    /// Rotation about the left axis, radians (positive = nose up-slope).
    pub pitch: f64,
    /// Heading, radians CCW from +x, wrapped to (−π, π].
    pub yaw: f64,
}

impl SurfacePose {
    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    /// Total ground tilt: the angle between the fitted plane's normal and
    /// vertical. Recovered from roll/pitch so it is exactly independent of
    /// yaw: tan²(tilt) = tan²(roll) + tan²(pitch).
    pub fn tilt(&self) -> f64 {
        (self.roll.tan().hypot(self.pitch.tan())).atan()
    }

    pub fn is_stable(&self, tilt_max: f64) -> bool {
        self.tilt() <= tilt_max
    }
}

/// Heightmap, obstacles, and the stability threshold in one bundle.
#[derive(Debug, Clone)]
pub struct WorldModel {
    pub heightmap: Heightmap,
    pub obstacles: ObstacleSet,
    /// Poses with ground tilt above this are rejected as unstable, radians.
    pub tilt_max: f64,
}

impl WorldModel {
    pub fn new(heightmap: Heightmap, obstacles: ObstacleSet) -> Self {
        Self {
            heightmap,
            obstacles,
            tilt_max: DEFAULT_TILT_MAX_RAD,
        }
    }

    pub fn bounds(&self) -> Rect {
        self.heightmap.bounds()
    }

    pub fn elevation_at(&self, x: f64, y: f64) -> Result<f64, TerrainError> {
        self.heightmap.elevation_at(x, y)
    }

    /// Ground slope in the direction `heading`, as the angle of the
    /// elevation change over a probe `step` ahead: atan((z₂ − z₁)/step).
    /// Positive means uphill travel.
    pub fn slope_along(
        &self,
        x: f64,
        y: f64,
        heading: f64,
        step: f64,
    ) -> Result<f64, TerrainError> {
        assert!(step > 0.0, "slope probe step must be positive");
        let z1 = self.heightmap.elevation_at(x, y)?;
        let z2 = self
            .heightmap
            .elevation_at(x + step * heading.cos(), y + step * heading.sin())?;
        Ok(((z2 - z1) / step).atan())
    }

    /// True when `(x, y)` is on the map, at least `clearance` from every
    /// obstacle polygon, not inside one, and clear of nodata ground.
    pub fn is_free(&self, x: f64, y: f64, clearance: f64) -> bool {
        if !self.heightmap.in_bounds(x, y) {
            return false;
        }
        if self.heightmap.nodata_within(x, y, clearance) {
            return false;
        }
        let p = Point2::new(x, y);
        !self.obstacles.contains(p) && self.obstacles.clearance(p) >= clearance
    }

    /// Ground pose at `(x, y)` under heading `yaw`: bilinear elevation
    /// plus roll/pitch of the locally fitted ground plane.
    pub fn surface_pose(&self, x: f64, y: f64, yaw: f64) -> Result<SurfacePose, TerrainError> {
        let z = self.heightmap.elevation_at(x, y)?;
        let g = self.heightmap.plane_gradient(x, y)?;
        let (sin_yaw, cos_yaw) = yaw.sin_cos();
        let forward = Vector2::new(cos_yaw, sin_yaw);
        let left = Vector2::new(-sin_yaw, cos_yaw);
        Ok(SurfacePose {
            x,
            y,
            z,
            roll: g.dot(&left).atan(),
            pitch: g.dot(&forward).atan(),
            yaw: wrap_angle(yaw),
        })
    }
}
