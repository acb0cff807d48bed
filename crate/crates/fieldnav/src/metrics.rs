//! Post-run metrics over a tick log: crowd-proximity histogram,
//! energy-per-metre, velocity, and path-deviation statistics bucketed by
//! how crowded the robot's surroundings were.
//!
//! # Windows and buckets
//!
//! The log is cut into disjoint 5-tick (1 s) windows, the last one possibly
//! shorter. Each window's *gain* is the sum of per-tick goal-distance
//! reductions, guarded so that goal handovers contribute nothing (the jump
//! in `dist_goal` at a handover says nothing about motion). Each window is
//! assigned a crowding *bucket*: the maximum, over its ticks, of the number
//! of confirmed tracks within 8 m of the robot, saturated at 5. Energy per
//! metre divides window energy by gain floored at 0.01 m, so stationary
//! windows read as enormous-but-finite J/m rather than dividing by zero.
//! Deviation is bucketed per tick rather than per window — it is an
//! instantaneous quantity.

use thiserror::Error;

use crate::executive::FRAMEWORK_RADIUS_M;
use crate::perception::TrackerParams;
use crate::runlog::{RunLog, TickRecord};
use crate::sim::TICK_DT;

/// Ticks per metrics window (1 s at the 0.2 s tick).
pub const WINDOW_TICKS: usize = 5;
/// Crowding-bucket saturation: buckets are 0, 1, ..., `BUCKET_MAX` where the
/// last means "`BUCKET_MAX` or more".
pub const BUCKET_MAX: usize = 5;
/// Gain floor (m) for energy-per-metre so stationary windows stay finite.
pub const GAIN_FLOOR_M: f64 = 0.01;
/// Proximity-histogram bin width (m of surface clearance).
pub const HIST_BIN_M: f64 = 0.25;
/// Proximity-histogram bin count; the histogram spans [0, 8) m.
pub const HIST_BINS: usize = 32;

/// One disjoint window of consecutive ticks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    /// Index of the first tick in the window.
    pub start_tick: usize,
    /// Number of ticks (= `WINDOW_TICKS` except possibly the last window).
    pub len: usize,
    /// Electrical energy over the window (J).
    pub energy_j: f64,
    /// Goal-guarded forward progress over the window (m); can be negative.
    pub gain_m: f64,
    /// Crowding bucket (max confirmed tracks within 8 m, saturated).
    pub bucket: usize,
    /// Energy per metre of progress (J/m), gain floored at `GAIN_FLOOR_M`.
    pub jpm: f64,
    /// Mean progress velocity (m/s).
    pub vel: f64,
}

/// Quartile summary of one metric within one crowding bucket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BucketSummary {
    pub bucket: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// Number of samples summarised.
    pub n: usize,
}

/// One proximity-histogram bin over surface clearance to the closest agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistBin {
    pub low_m: f64,
    pub high_m: f64,
    pub count: usize,
    /// Share of all binned ticks, in percent.
    pub percent: f64,
}

/// Everything [`compute_metrics`] produces.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    /// Energy per metre by crowding bucket (windowed).
    pub jpm: Vec<BucketSummary>,
    /// Progress velocity by crowding bucket (windowed).
    pub vel: Vec<BucketSummary>,
    /// Path deviation by crowding bucket (per tick).
    pub dev: Vec<BucketSummary>,
    /// Surface-clearance histogram over ticks with an agent inside 8 m.
    pub histogram: Vec<HistBin>,
    /// The raw windows behind `jpm` and `vel`.
    pub windows: Vec<Window>,
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("the run log is empty")]
    EmptyLog,
    #[error("metrics csv line {line}: malformed row")]
    Parse { line: usize },
}

/// Per-tick goal-distance gains, zeroed across goal handovers (and for the
/// first tick, which has no predecessor).
pub fn tick_gains(log: &RunLog) -> Vec<f64> {
    let r = &log.records;
    let mut gains = vec![0.0; r.len()];
    for i in 1..r.len() {
        if r[i].goal_idx == r[i - 1].goal_idx {
            gains[i] = r[i - 1].dist_goal - r[i].dist_goal;
        }
    }
    gains
}

/// Number of confirmed tracks within `radius` of the robot on this tick.
pub fn confirmed_within(record: &TickRecord, radius: f64) -> usize {
    let confirm = TrackerParams::default().conf_confirm;
    let robot = crate::geom::Point2::new(record.x, record.y);
    record
        .tracks
        .iter()
        .filter(|(_, pos, conf)| *conf >= confirm && (pos - robot).norm() <= radius)
        .count()
}

/// Linear-interpolated (q1, median, q3) of an unsorted, non-empty slice.
pub fn quartiles(values: &[f64]) -> Option<(f64, f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let at = |q: f64| {
        let idx = q * (sorted.len() - 1) as f64;
        let lo = idx.floor() as usize;
        let hi = idx.ceil() as usize;
        let frac = idx - lo as f64;
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    };
    Some((at(0.25), at(0.5), at(0.75)))
}

fn summarise(by_bucket: &[Vec<f64>]) -> Vec<BucketSummary> {
    by_bucket
        .iter()
        .enumerate()
        .filter_map(|(bucket, values)| {
            quartiles(values).map(|(q1, median, q3)| BucketSummary {
                bucket,
                q1,
                median,
                q3,
                n: values.len(),
            })
        })
        .collect()
}

/// Compute the full metrics report. `robot_radius` converts ground-truth
/// centre distances into surface clearances for the histogram.
pub fn compute_metrics(log: &RunLog, robot_radius: f64) -> Result<MetricsReport, MetricsError> {
    let records = &log.records;
    if records.is_empty() {
        return Err(MetricsError::EmptyLog);
    }
    let gains = tick_gains(log);
    let crowding: Vec<usize> = records
        .iter()
        .map(|r| confirmed_within(r, FRAMEWORK_RADIUS_M))
        .collect();

    // Disjoint windows, trailing partial included.
    let mut windows = Vec::with_capacity(records.len() / WINDOW_TICKS + 1);
    let mut start = 0;
    while start < records.len() {
        let len = WINDOW_TICKS.min(records.len() - start);
        let range = start..start + len;
        let energy_j: f64 = range.clone().map(|i| records[i].power_w * TICK_DT).sum();
        let gain_m: f64 = gains[range.clone()].iter().sum();
        let bucket = range
            .clone()
            .map(|i| crowding[i])
            .max()
            .expect("window is non-empty")
            .min(BUCKET_MAX);
        windows.push(Window {
            start_tick: start,
            len,
            energy_j,
            gain_m,
            bucket,
            jpm: energy_j / gain_m.max(GAIN_FLOOR_M),
            vel: gain_m / (len as f64 * TICK_DT),
        });
        start += len;
    }

    let mut jpm_by: Vec<Vec<f64>> = vec![Vec::new(); BUCKET_MAX + 1];
    let mut vel_by: Vec<Vec<f64>> = vec![Vec::new(); BUCKET_MAX + 1];
    for w in &windows {
        jpm_by[w.bucket].push(w.jpm);
        vel_by[w.bucket].push(w.vel);
    }
    let mut dev_by: Vec<Vec<f64>> = vec![Vec::new(); BUCKET_MAX + 1];
    for (r, &c) in records.iter().zip(&crowding) {
        dev_by[c.min(BUCKET_MAX)].push(r.deviation);
    }

    // Surface-clearance histogram over ticks with an agent inside 8 m.
    let mut counts = [0usize; HIST_BINS];
    let mut total = 0usize;
    for r in records {
        let surface = r.min_centre_dist - robot_radius;
        if surface < HIST_BINS as f64 * HIST_BIN_M {
            let bin = ((surface / HIST_BIN_M).floor() as isize).clamp(0, HIST_BINS as isize - 1);
            counts[bin as usize] += 1;
            total += 1;
        }
    }
    let histogram = counts
        .iter()
        .enumerate()
        .map(|(i, &count)| HistBin {
            low_m: i as f64 * HIST_BIN_M,
            high_m: (i + 1) as f64 * HIST_BIN_M,
            count,
            percent: if total == 0 {
                0.0
            } else {
                100.0 * count as f64 / total as f64
            },
        })
        .collect();

    Ok(MetricsReport {
        jpm: summarise(&jpm_by),
        vel: summarise(&vel_by),
        dev: summarise(&dev_by),
        histogram,
        windows,
    })
}

/// CSV of the bucketed quartile summaries:
/// `metric,bucket,median,q1,q3,n` with metric in `jpm`, `vel`, `dev`.
pub fn metrics_csv(report: &MetricsReport) -> String {
    let mut out = String::from("metric,bucket,median,q1,q3,n\n");
    for (name, rows) in [
        ("jpm", &report.jpm),
        ("vel", &report.vel),
        ("dev", &report.dev),
    ] {
        for s in rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                name, s.bucket, s.median, s.q1, s.q3, s.n
            ));
        }
    }
    out
}

/// CSV of the proximity histogram: `bin_low,bin_high,count,percent`.
pub fn histogram_csv(report: &MetricsReport) -> String {
    let mut out = String::from("bin_low,bin_high,count,percent\n");
    for b in &report.histogram {
        out.push_str(&format!(
            "{},{},{},{}\n",
            b.low_m, b.high_m, b.count, b.percent
        ));
    }
    out
}

/// Parse [`metrics_csv`] output back into `(metric name, summary)` rows.
/// Floats print in shortest round-trip form, so parsed values are identical
/// to the originals.
pub fn parse_metrics_csv(text: &str) -> Result<Vec<(String, BucketSummary)>, MetricsError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let parsed = (|| {
            let [name, bucket, median, q1, q3, n] = fields.as_slice() else {
                return None;
            };
            Some((
                name.to_string(),
                BucketSummary {
                    bucket: bucket.parse().ok()?,
                    median: median.parse().ok()?,
                    q1: q1.parse().ok()?,
                    q3: q3.parse().ok()?,
                    n: n.parse().ok()?,
                },
            ))
        })()
        .ok_or(MetricsError::Parse { line: i + 1 })?;
        rows.push(parsed);
    }
    Ok(rows)
}

/// Parse [`histogram_csv`] output back into bins.
pub fn parse_histogram_csv(text: &str) -> Result<Vec<HistBin>, MetricsError> {
    let mut bins = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let parsed = (|| {
            let [low, high, count, percent] = fields.as_slice() else {
                return None;
            };
            Some(HistBin {
                low_m: low.parse().ok()?,
                high_m: high.parse().ok()?,
                count: count.parse().ok()?,
                percent: percent.parse().ok()?,
            })
        })()
        .ok_or(MetricsError::Parse { line: i + 1 })?;
        bins.push(parsed);
    }
    Ok(bins)
}
