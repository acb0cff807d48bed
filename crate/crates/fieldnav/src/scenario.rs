//! Scenario files: a line-oriented, sectioned key-value format describing
//! one complete simulation setup — world, goals, crowd, perception,
//! planner, energy constants, and run parameters.
//!
//! # Grammar
//!
//! ```text
//! file     := (section | blank | comment)*
//! section  := '[' name ']' NEWLINE (entry | blank | comment)*
//! entry    := key '=' value NEWLINE
//! comment  := '#' ...
//! ```
//!
//! Sections and keys (defaults in parentheses; `*` = repeatable):
//!
//! ```text
//! [world]
//!   heightmap = flat:<ncols>x<nrows>:<cellsize>   synthetic flat ground at z=0
//!             | <path>                            ESRI ASCII grid file
//!   obstacle  = x,y x,y x,y ...                   *polygon vertices, CCW or CW
//! [goals]
//!   start     = x,y[,heading]                     robot start pose
//!   goal      = x,y[,heading] [@ accuracy]        *goal with arrival accuracy (2.0)
//!   n_samples = int (200)      r_conn = m (4.0)   roadmap construction
//!   kappa_max = 1/m (0.7)
//! [crowd]                                         omit section for no crowd
//!   density   = m²/agent (0 = empty)
//!   policy    = cross | hold (cross)
//!   arena     = xmin,ymin,xmax,ymax               spawn + goal rectangle
//!   keepout   = x,y,r                             optional spawn-free disc
//! [perception]
//!   model     = ideal | swagbot-table1 (ideal)
//!   sigma_pos = m (0.1)
//! [planner]
//!   kind         = mcts | pf | fs (mcts)
//!   budget_iters = int (2000)    horizon = steps (8)
//!   interaction_radius = m (2.0)
//!   speeds        = v,v,...                       action-space override
//!   dheadings_deg = a,a,...                       action-space override
//! [energy]
//!   mass = kg (220.6)  mu = (0.0767)  static_power = W (203)
//! [run]
//!   seed     = u64                                mandatory
//!   duration = s (120)
//!   dwell_s  = s (5)
//! ```
//!
//! Headings omitted from `start`/`goal` are derived automatically: each
//! goal faces away from the start, and the start faces the first goal.

use crate::energy::EnergyParams;
use crate::geom::{Point2, Rect};
use crate::planners::PlannerKind;
use crate::roadmap::PrmParams;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("scenario is missing required key {key} in [{section}]")]
    Missing {
        section: &'static str,
        key: &'static str,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Where the ground elevation comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum HeightmapSource {
    /// Synthetic flat ground at z = 0 with the given node grid.
    Flat {
        ncols: usize,
        nrows: usize,
        cellsize: f64,
    },
    /// An ESRI ASCII grid file, resolved relative to the scenario file.
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct WorldConfig {
    pub heightmap: HeightmapSource,
    /// Obstacle polygons, one vertex list each.
    pub obstacles: Vec<Vec<Point2>>,
}

#[derive(Debug, Clone)]
pub struct GoalsConfig {
    pub start: (Point2, Option<f64>),
    /// Goal position, optional explicit heading, arrival accuracy.
    pub goals: Vec<(Point2, Option<f64>, f64)>,
    pub prm: PrmParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrowdPolicyConfig {
    Cross,
    Hold,
}

#[derive(Debug, Clone)]
pub struct CrowdConfig {
    /// Square metres of arena per agent; 0 disables the crowd.
    pub density: f64,
    pub policy: CrowdPolicyConfig,
    pub arena: Rect,
    pub keepout: Option<(Point2, f64)>,
}

#[derive(Debug, Clone)]
pub struct PerceptionConfig {
    /// Detection model preset name (`ideal`, `swagbot-table1`).
    pub model: String,
    pub sigma_pos: f64,
}

#[derive(Debug, Clone)]
pub struct PlannerConfig {
    pub kind: PlannerKind,
    pub budget_iters: usize,
    pub horizon: usize,
    pub interaction_radius: f64,
    /// Optional action-space overrides (speeds m/s, headings degrees).
    pub speeds: Option<Vec<f64>>,
    pub dheadings_deg: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub duration: f64,
    pub dwell_s: f64,
}

/// A fully parsed scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub world: WorldConfig,
    pub goals: GoalsConfig,
    pub crowd: Option<CrowdConfig>,
    pub perception: PerceptionConfig,
    pub planner: PlannerConfig,
    pub energy: EnergyParams,
    pub run: RunConfig,
}

/// Read and parse a scenario file; relative heightmap paths are resolved
/// against the scenario file's directory and must exist.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut scenario = parse_scenario(&text)?;
    if let HeightmapSource::File(ref file) = scenario.world.heightmap {
        let resolved = if file.is_relative() {
            path.parent().unwrap_or(Path::new(".")).join(file)
        } else {
            file.clone()
        };
        if !resolved.exists() {
            return Err(ScenarioError::Io {
                path: resolved,
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "heightmap not found"),
            });
        }
        scenario.world.heightmap = HeightmapSource::File(resolved);
    }
    Ok(scenario)
}

fn err(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, ScenarioError> {
    value
        .trim()
        .parse()
        .map_err(|_| err(line, format!("{key}: expected a number, got {value:?}")))
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize, ScenarioError> {
    value
        .trim()
        .parse()
        .map_err(|_| err(line, format!("{key}: expected an integer, got {value:?}")))
}

/// Parse "x,y" or "x,y,heading".
fn parse_pose(line: usize, key: &str, value: &str) -> Result<(Point2, Option<f64>), ScenarioError> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != 2 && parts.len() != 3 {
        return Err(err(line, format!("{key}: expected x,y or x,y,heading")));
    }
    let x = parse_f64(line, key, parts[0])?;
    let y = parse_f64(line, key, parts[1])?;
    let heading = if parts.len() == 3 {
        Some(parse_f64(line, key, parts[2])?)
    } else {
        None
    };
    Ok((Point2::new(x, y), heading))
}

fn parse_number_list(line: usize, key: &str, value: &str) -> Result<Vec<f64>, ScenarioError> {
    value
        .split(',')
        .map(|v| parse_f64(line, key, v))
        .collect()
}

/// Parse scenario text. Unknown sections and keys are errors so that typos
/// in fixtures fail loudly.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut world = WorldConfig {
        heightmap: HeightmapSource::Flat {
            ncols: 101,
            nrows: 101,
            cellsize: 1.0,
        },
        obstacles: Vec::new(),
    };
    let mut start: Option<(Point2, Option<f64>)> = None;
    let mut goals: Vec<(Point2, Option<f64>, f64)> = Vec::new();
    let mut prm = PrmParams::default();
    let mut crowd: Option<CrowdConfig> = None;
    let mut perception = PerceptionConfig {
        model: "ideal".to_string(),
        sigma_pos: 0.1,
    };
    let mut planner = PlannerConfig {
        kind: PlannerKind::Mcts,
        budget_iters: 2000,
        horizon: 8,
        interaction_radius: 2.0,
        speeds: None,
        dheadings_deg: None,
    };
    let mut energy = EnergyParams::default();
    let mut seed: Option<u64> = None;
    let mut duration = 120.0;
    let mut dwell_s = 5.0;

    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err(line, "unterminated section header"))?
                .trim()
                .to_string();
            match name.as_str() {
                "world" | "goals" | "crowd" | "perception" | "planner" | "energy" | "run" => {
                    if name == "crowd" && crowd.is_none() {
                        crowd = Some(CrowdConfig {
                            density: 0.0,
                            policy: CrowdPolicyConfig::Cross,
                            arena: Rect::new(0.0, 0.0, 100.0, 100.0),
                            keepout: None,
                        });
                    }
                    section = Some(name);
                }
                other => return Err(err(line, format!("unknown section [{other}]"))),
            }
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(line, "expected key = value"))?;
        let key = key.trim();
        let value = value.trim();
        let section_name = section
            .as_deref()
            .ok_or_else(|| err(line, "key before any [section]"))?;
        match (section_name, key) {
            ("world", "heightmap") => {
                world.heightmap = if let Some(spec) = value.strip_prefix("flat:") {
                    let (dims, cell) = spec
                        .rsplit_once(':')
                        .ok_or_else(|| err(line, "flat heightmap needs flat:WxH:cellsize"))?;
                    let (w, h) = dims
                        .split_once('x')
                        .ok_or_else(|| err(line, "flat heightmap needs flat:WxH:cellsize"))?;
                    HeightmapSource::Flat {
                        ncols: parse_usize(line, key, w)?,
                        nrows: parse_usize(line, key, h)?,
                        cellsize: parse_f64(line, key, cell)?,
                    }
                } else {
                    HeightmapSource::File(PathBuf::from(value))
                };
            }
            ("world", "obstacle") => {
                let vertices: Result<Vec<Point2>, _> = value
                    .split_whitespace()
                    .map(|pair| parse_pose(line, key, pair).map(|(p, _)| p))
                    .collect();
                let vertices = vertices?;
                if vertices.len() < 3 {
                    return Err(err(line, "obstacle polygon needs at least 3 vertices"));
                }
                world.obstacles.push(vertices);
            }
            ("goals", "start") => start = Some(parse_pose(line, key, value)?),
            ("goals", "goal") => {
                let (pose_part, accuracy) = match value.split_once('@') {
                    Some((p, a)) => (p.trim(), parse_f64(line, key, a)?),
                    None => (value, 2.0),
                };
                if accuracy <= 0.0 {
                    return Err(err(line, "goal accuracy must be positive"));
                }
                let (point, heading) = parse_pose(line, key, pose_part)?;
                goals.push((point, heading, accuracy));
            }
            ("goals", "n_samples") => prm.n_samples = parse_usize(line, key, value)?,
            ("goals", "r_conn") => prm.r_conn = parse_f64(line, key, value)?,
            ("goals", "kappa_max") => prm.kappa_max = parse_f64(line, key, value)?,
            ("crowd", "density") => crowd.as_mut().unwrap().density = parse_f64(line, key, value)?,
            ("crowd", "policy") => {
                crowd.as_mut().unwrap().policy = match value {
                    "cross" => CrowdPolicyConfig::Cross,
                    "hold" => CrowdPolicyConfig::Hold,
                    other => return Err(err(line, format!("unknown crowd policy {other:?}"))),
                };
            }
            ("crowd", "arena") => {
                let nums = parse_number_list(line, key, value)?;
                if nums.len() != 4 || nums[0] >= nums[2] || nums[1] >= nums[3] {
                    return Err(err(line, "arena needs xmin,ymin,xmax,ymax"));
                }
                crowd.as_mut().unwrap().arena = Rect::new(nums[0], nums[1], nums[2], nums[3]);
            }
            ("crowd", "keepout") => {
                let nums = parse_number_list(line, key, value)?;
                if nums.len() != 3 || nums[2] <= 0.0 {
                    return Err(err(line, "keepout needs x,y,radius"));
                }
                crowd.as_mut().unwrap().keepout = Some((Point2::new(nums[0], nums[1]), nums[2]));
            }
            ("perception", "model") => perception.model = value.to_string(),
            ("perception", "sigma_pos") => perception.sigma_pos = parse_f64(line, key, value)?,
            ("planner", "kind") => {
                planner.kind = PlannerKind::parse(value)
                    .ok_or_else(|| err(line, format!("unknown planner {value:?}")))?;
            }
            ("planner", "budget_iters") => planner.budget_iters = parse_usize(line, key, value)?,
            ("planner", "horizon") => planner.horizon = parse_usize(line, key, value)?,
            ("planner", "interaction_radius") => {
                planner.interaction_radius = parse_f64(line, key, value)?;
            }
            ("planner", "speeds") => planner.speeds = Some(parse_number_list(line, key, value)?),
            ("planner", "dheadings_deg") => {
                planner.dheadings_deg = Some(parse_number_list(line, key, value)?);
            }
            ("energy", "mass") => energy.mass_kg = parse_f64(line, key, value)?,
            ("energy", "mu") => energy.friction_coeff = parse_f64(line, key, value)?,
            ("energy", "static_power") => energy.static_power_w = parse_f64(line, key, value)?,
            ("run", "seed") => {
                seed = Some(value.parse().map_err(|_| {
                    err(line, format!("seed: expected an unsigned integer, got {value:?}"))
                })?);
            }
            ("run", "duration") => duration = parse_f64(line, key, value)?,
            ("run", "dwell_s") => dwell_s = parse_f64(line, key, value)?,
            (section, key) => {
                return Err(err(line, format!("unknown key {key:?} in [{section}]")));
            }
        }
    }

    let start = start.ok_or(ScenarioError::Missing {
        section: "goals",
        key: "start",
    })?;
    if goals.is_empty() {
        return Err(ScenarioError::Missing {
            section: "goals",
            key: "goal",
        });
    }
    let seed = seed.ok_or(ScenarioError::Missing {
        section: "run",
        key: "seed",
    })?;
    let crowd = crowd.filter(|c| c.density > 0.0);

    Ok(Scenario {
        world,
        goals: GoalsConfig { start, goals, prm },
        crowd,
        perception,
        planner,
        energy,
        run: RunConfig {
            seed,
            duration,
            dwell_s,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = "\
# demo scenario
[world]
heightmap = flat:101x101:1.0
obstacle = 30,40 35,40 35,45 30,45

[goals]
start = 5,50
goal = 90,50 @ 2.0
goal = 50,90,1.57 @ 1.0
n_samples = 0
r_conn = 150

[crowd]
density = 10
policy = cross
arena = 20,20,80,80
keepout = 5,50,4.0

[perception]
model = swagbot-table1
sigma_pos = 0.1

[planner]
kind = mcts
budget_iters = 300

[energy]
mass = 220.6
mu = 0.0767
static_power = 203

[run]
seed = 42
duration = 60
dwell_s = 0
";

    #[test]
    fn full_scenario_parses_every_section() {
        let s = parse_scenario(FULL).unwrap();
        assert_eq!(
            s.world.heightmap,
            HeightmapSource::Flat {
                ncols: 101,
                nrows: 101,
                cellsize: 1.0
            }
        );
        assert_eq!(s.world.obstacles.len(), 1);
        assert_eq!(s.goals.start.0, Point2::new(5.0, 50.0));
        assert_eq!(s.goals.goals.len(), 2);
        assert_eq!(s.goals.goals[0].2, 2.0);
        assert_eq!(s.goals.goals[1].1, Some(1.57));
        assert_eq!(s.goals.prm.n_samples, 0);
        let crowd = s.crowd.expect("crowd configured");
        assert_eq!(crowd.density, 10.0);
        assert_eq!(crowd.arena, Rect::new(20.0, 20.0, 80.0, 80.0));
        assert_eq!(crowd.keepout.unwrap().1, 4.0);
        assert_eq!(s.perception.model, "swagbot-table1");
        assert_eq!(s.planner.kind, PlannerKind::Mcts);
        assert_eq!(s.planner.budget_iters, 300);
        assert_eq!(s.run.seed, 42);
        assert_eq!(s.run.duration, 60.0);
        assert_eq!(s.run.dwell_s, 0.0);
    }

    #[test]
    fn seed_is_mandatory() {
        let text = "[goals]\nstart = 0,0\ngoal = 10,0\n";
        match parse_scenario(text) {
            Err(ScenarioError::Missing { section, key }) => {
                assert_eq!(section, "run");
                assert_eq!(key, "seed");
            }
            other => panic!("expected missing-seed error, got {other:?}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "[world]\nheightmap = flat:101x101:1.0\nbogus_key = 1\n";
        match parse_scenario(text) {
            Err(ScenarioError::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("bogus_key"), "{message}");
            }
            other => panic!("expected line error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_sections_and_bad_values_are_rejected() {
        assert!(matches!(
            parse_scenario("[nope]\n"),
            Err(ScenarioError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_scenario("[run]\nseed = -3\n"),
            Err(ScenarioError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_scenario("[goals]\ngoal = 1,2 @ 0\n"),
            Err(ScenarioError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_scenario("seed = 1\n"),
            Err(ScenarioError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn zero_density_crowd_is_dropped() {
        let text = "\
[goals]
start = 0,0
goal = 10,0
[crowd]
density = 0
[run]
seed = 1
";
        let s = parse_scenario(text).unwrap();
        assert!(s.crowd.is_none());
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "\
# leading comment

[goals]  # trailing comment on a section
start = 0,0   # trailing comment on an entry
goal = 10,0
[run]
seed = 7
";
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.run.seed, 7);
        assert_eq!(s.goals.start.0, Point2::new(0.0, 0.0));
    }
}
