//! Per-tick simulation records and their CSV serialization.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! parsed log is value-identical to the one written and a fixed seed yields
//! a byte-identical file.

use crate::executive::Mode;
use crate::geom::Point2;
use std::fmt::Write as _;
use thiserror::Error;

/// One tick of the simulation, captured after the robot and crowd moved.
#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    /// Tick start time (s); uniformly spaced.
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
    pub mode: Mode,
    /// Instantaneous electrical power this tick (W).
    pub power_w: f64,
    /// Fail-safe stop flag.
    pub fs: bool,
    /// Id of the dynamic plan being followed or prepared; 0 = none.
    pub plan_id: u64,
    /// Index of the active goal in visit order.
    pub goal_idx: usize,
    /// Euclidean distance to the active goal waypoint (m).
    pub dist_goal: f64,
    /// Perpendicular distance to the reference polyline (m).
    pub deviation: f64,
    /// Ground-truth distance to the closest agent centre (m); infinite with
    /// no agents.
    pub min_centre_dist: f64,
    /// Ground-truth agent centre positions.
    pub agents: Vec<Point2>,
    /// Tracker output: id, position, confidence.
    pub tracks: Vec<(u64, Point2, i32)>,
}

/// A complete run: uniformly ticked records.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunLog {
    pub records: Vec<TickRecord>,
}

#[derive(Debug, Error)]
pub enum RunLogError {
    #[error("runlog line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub const RUNLOG_HEADER: &str = "t,x,y,heading,speed,mode,power_w,fs,plan_id,goal_idx,dist_goal,deviation,min_centre_dist,agents,tracks";

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::LongTerm => "long_term",
        Mode::Dynamic => "dynamic",
        Mode::FailSafe => "failsafe",
    }
}

fn mode_from(name: &str) -> Option<Mode> {
    match name {
        "long_term" => Some(Mode::LongTerm),
        "dynamic" => Some(Mode::Dynamic),
        "failsafe" => Some(Mode::FailSafe),
        _ => None,
    }
}

impl RunLog {
    /// Serialize to CSV. Agent and track lists are packed into one column
    /// each with `;` between items and `:` between fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.records.len() * 128 + 128);
        out.push_str(RUNLOG_HEADER);
        out.push('\n');
        for r in &self.records {
            let agents = r
                .agents
                .iter()
                .map(|p| format!("{}:{}", p.x, p.y))
                .collect::<Vec<_>>()
                .join(";");
            let tracks = r
                .tracks
                .iter()
                .map(|(id, p, conf)| format!("{id}:{}:{}:{conf}", p.x, p.y))
                .collect::<Vec<_>>()
                .join(";");
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{agents},{tracks}",
                r.t,
                r.x,
                r.y,
                r.heading,
                r.speed,
                mode_name(r.mode),
                r.power_w,
                u8::from(r.fs),
                r.plan_id,
                r.goal_idx,
                r.dist_goal,
                r.deviation,
                r.min_centre_dist,
            )
            .expect("writing to a String cannot fail");
        }
        out
    }

    /// Parse a CSV produced by [`RunLog::to_csv`]; exact value round-trip.
    pub fn from_csv(text: &str) -> Result<Self, RunLogError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(RunLogError::Parse {
            line: 1,
            message: "empty file".into(),
        })?;
        if header != RUNLOG_HEADER {
            return Err(RunLogError::Parse {
                line: 1,
                message: format!("unexpected header {header:?}"),
            });
        }
        let mut records = Vec::new();
        for (idx, raw) in lines {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = raw.split(',').collect();
            if fields.len() != 15 {
                return Err(RunLogError::Parse {
                    line,
                    message: format!("expected 15 columns, got {}", fields.len()),
                });
            }
            let f = |i: usize, name: &str| -> Result<f64, RunLogError> {
                fields[i].parse().map_err(|_| RunLogError::Parse {
                    line,
                    message: format!("bad {name}: {:?}", fields[i]),
                })
            };
            let agents = parse_packed(fields[13], 2, line)?
                .into_iter()
                .map(|v| Point2::new(v[0], v[1]))
                .collect();
            let tracks = parse_packed(fields[14], 4, line)?
                .into_iter()
                .map(|v| (v[0] as u64, Point2::new(v[1], v[2]), v[3] as i32))
                .collect();
            records.push(TickRecord {
                t: f(0, "t")?,
                x: f(1, "x")?,
                y: f(2, "y")?,
                heading: f(3, "heading")?,
                speed: f(4, "speed")?,
                mode: mode_from(fields[5]).ok_or_else(|| RunLogError::Parse {
                    line,
                    message: format!("bad mode: {:?}", fields[5]),
                })?,
                power_w: f(6, "power_w")?,
                fs: match fields[7] {
                    "0" => false,
                    "1" => true,
                    other => {
                        return Err(RunLogError::Parse {
                            line,
                            message: format!("bad fs flag: {other:?}"),
                        })
                    }
                },
                plan_id: fields[8].parse().map_err(|_| RunLogError::Parse {
                    line,
                    message: format!("bad plan_id: {:?}", fields[8]),
                })?,
                goal_idx: fields[9].parse().map_err(|_| RunLogError::Parse {
                    line,
                    message: format!("bad goal_idx: {:?}", fields[9]),
                })?,
                dist_goal: f(10, "dist_goal")?,
                deviation: f(11, "deviation")?,
                min_centre_dist: f(12, "min_centre_dist")?,
                agents,
                tracks,
            });
        }
        Ok(Self { records })
    }
}

/// Parse a `;`-separated list of `:`-separated numeric tuples.
fn parse_packed(field: &str, arity: usize, line: usize) -> Result<Vec<Vec<f64>>, RunLogError> {
    if field.is_empty() {
        return Ok(Vec::new());
    }
    field
        .split(';')
        .map(|item| {
            let parts: Vec<&str> = item.split(':').collect();
            if parts.len() != arity {
                return Err(RunLogError::Parse {
                    line,
                    message: format!("expected {arity} fields per item, got {item:?}"),
                });
            }
            parts
                .iter()
                .map(|p| {
                    p.parse().map_err(|_| RunLogError::Parse {
                        line,
                        message: format!("bad number {p:?}"),
                    })
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_record(t: f64) -> TickRecord {
        TickRecord {
            t,
            x: 1.0 + t,
            y: -0.125 * t,
            heading: 0.3,
            speed: 0.9,
            mode: if t > 0.5 { Mode::Dynamic } else { Mode::LongTerm },
            power_w: 351.48685962,
            fs: t > 1.0,
            plan_id: (t * 5.0) as u64,
            goal_idx: 0,
            dist_goal: 20.0 - t,
            deviation: 0.0123456789012345,
            min_centre_dist: if t > 0.7 { 4.5 } else { f64::INFINITY },
            agents: vec![Point2::new(3.0, 4.000000001), Point2::new(-1.5, 2.25)],
            tracks: vec![(7, Point2::new(3.1, 3.9), 5)],
        }
    }

    #[test]
    fn csv_round_trip_is_identity() {
        let log = RunLog {
            records: (0..12).map(|k| sample_record(k as f64 * 0.2)).collect(),
        };
        let csv = log.to_csv();
        let parsed = RunLog::from_csv(&csv).unwrap();
        assert_eq!(parsed, log);
        // Serialization itself is deterministic.
        assert_eq!(csv, parsed.to_csv());
    }

    #[test]
    fn empty_lists_round_trip() {
        let mut r = sample_record(0.0);
        r.agents.clear();
        r.tracks.clear();
        r.min_centre_dist = f64::INFINITY;
        let log = RunLog { records: vec![r] };
        let parsed = RunLog::from_csv(&log.to_csv()).unwrap();
        assert_eq!(parsed, log);
        assert!(parsed.records[0].min_centre_dist.is_infinite());
    }

    #[test]
    fn header_only_is_an_empty_log() {
        let parsed = RunLog::from_csv(&format!("{RUNLOG_HEADER}\n")).unwrap();
        assert!(parsed.records.is_empty());
    }

    #[test]
    fn malformed_rows_report_their_line() {
        let bad = format!("{RUNLOG_HEADER}\n0.2,oops\n");
        match RunLog::from_csv(&bad) {
            Err(RunLogError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        match RunLog::from_csv("bogus\n") {
            Err(RunLogError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected header error, got {other:?}"),
        }
    }
}
