//! Scenario factory: the fifteen published large-scale scenarios and
//! hand-written custom configurations.
//!
//! A [`ScenarioConfig`] fully determines a problem instance. Construction
//! draws, from one stream seeded with `config.seed`:
//!
//! 1. a permutation of `0..d` that assigns decision variables to sub-functions
//!    (non-separable groups in listed order, then one sub-function per
//!    separable variable);
//! 2. per sub-function: the component count, the severities
//!    (shift, angle, height, width, τ, η), the weight, then per component the
//!    center, height, widths, angle, τ, `η_1..η_4`, and the rotation matrix.
//!
//! The same stream then continues into the environment dynamics.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::landscape::{Component, Interval, ParameterBounds, ProblemInstance, SeverityBundle, SubFunction};
use crate::rng::RandomSource;
use crate::rotation::random_orthogonal;

pub const ENVIRONMENTS: usize = 30;
pub const DEFAULT_PERIOD_PER_DIM: u64 = 500;
pub const CHALLENGING_PERIOD_PER_DIM: u64 = 200;

/// `(d, non-separable group sizes, separable count as listed)` for f1..f15.
const PUBLISHED: [(usize, &[usize], usize); 15] = [
    (50, &[2, 3, 5, 6, 7, 8, 10], 10),
    (50, &[2, 3, 5, 5], 35),
    (50, &[2, 2, 3, 5, 5, 5, 5, 5, 8, 10], 0),
    (50, &[], 50),
    (50, &[50], 0),
    (100, &[2, 2, 3, 5, 5, 6, 6, 8, 8, 10, 10, 15], 20),
    (100, &[2, 2, 3, 3, 5, 5, 10], 70),
    (100, &[2, 2, 2, 2, 3, 3, 5, 5, 5, 5, 5, 5, 8, 8, 10, 10, 20], 0),
    (100, &[], 100),
    (100, &[100], 0),
    (200, &[2, 2, 3, 5, 5, 6, 6, 8, 8, 10, 10, 15, 20, 20, 30], 50),
    (200, &[2, 3, 5, 10, 20, 30], 130),
    (200, &[2, 2, 2, 3, 5, 5, 5, 5, 5, 8, 8, 10, 10, 10, 20, 20, 30, 50], 0),
    (200, &[], 200),
    (200, &[200], 0),
];

/// Dimension and non-separable group sizes of a published scenario.
pub fn published_structure(id: u8) -> Result<(usize, &'static [usize], usize)> {
    PUBLISHED
        .get((id as usize).wrapping_sub(1))
        .copied()
        .ok_or_else(|| Error::UnknownScenario(format!("f{id}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Default,
    Challenging,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Default => "default",
            Mode::Challenging => "challenging",
        })
    }
}

/// `f1`..`f15`, or a custom configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioId {
    Published(u8),
    Custom,
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioId::Published(id) => write!(f, "f{id}"),
            ScenarioId::Custom => f.write_str("custom"),
        }
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "custom" {
            return Ok(ScenarioId::Custom);
        }
        let id = s
            .strip_prefix('f')
            .or_else(|| s.strip_prefix('F'))
            .and_then(|n| n.parse::<u8>().ok())
            .filter(|n| (1..=15).contains(n))
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))?;
        Ok(ScenarioId::Published(id))
    }
}

impl Serialize for ScenarioId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ScenarioId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Inclusive integer range for component counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountRange {
    pub min: u64,
    pub max: u64,
}

/// Parameter ranges: the bounds each component parameter lives in, plus the
/// sampling ranges for component counts and sub-function weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ranges {
    pub search: Interval,
    pub height: Interval,
    pub width: Interval,
    pub angle: Interval,
    pub tau: Interval,
    pub eta: Interval,
    pub components: CountRange,
    pub weight: Interval,
}

impl Ranges {
    pub fn parameter_bounds(&self) -> ParameterBounds {
        ParameterBounds {
            search: self.search,
            height: self.height,
            width: self.width,
            angle: self.angle,
            tau: self.tau,
            eta: self.eta,
        }
    }
}

/// Ranges each sub-function's change severities are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeverityRanges {
    pub shift: Interval,
    pub angle: Interval,
    pub height: Interval,
    pub width: Interval,
    pub tau: Interval,
    pub eta: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario_id: ScenarioId,
    pub mode: Mode,
    pub seed: u64,
    pub dimension: usize,
    pub groups: Vec<usize>,
    pub separable_count: usize,
    pub change_period: u64,
    pub environments: usize,
    pub ranges: Ranges,
    pub severities: SeverityRanges,
    #[serde(default = "default_true")]
    pub rotation_enabled: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn default_true() -> bool {
    true
}

impl Ranges {
    pub fn published(mode: Mode) -> Self {
        use std::f64::consts::PI;
        Ranges {
            search: Interval::new(-50.0, 50.0),
            height: Interval::new(30.0, 70.0),
            width: Interval::new(1.0, 12.0),
            angle: Interval::new(-PI, PI),
            tau: Interval::new(-0.5, 0.5),
            eta: Interval::new(-20.0, 20.0),
            components: match mode {
                Mode::Default => CountRange { min: 5, max: 15 },
                Mode::Challenging => CountRange { min: 15, max: 35 },
            },
            weight: Interval::new(0.5, 3.0),
        }
    }
}

impl SeverityRanges {
    pub fn published(mode: Mode) -> Self {
        use std::f64::consts::PI;
        SeverityRanges {
            shift: match mode {
                Mode::Default => Interval::new(1.0, 3.0),
                Mode::Challenging => Interval::new(3.0, 5.0),
            },
            angle: Interval::new(PI / 12.0, PI / 6.0),
            height: Interval::new(5.0, 9.0),
            width: Interval::new(0.5, 1.5),
            tau: Interval::new(0.05, 0.15),
            eta: Interval::new(1.0, 3.0),
        }
    }
}

impl ScenarioConfig {
    /// Configuration of published scenario `f{id}`.
    pub fn published(id: u8, mode: Mode, seed: u64) -> Result<Self> {
        let (d, groups, listed_separable) = published_structure(id)?;
        let grouped: usize = groups.iter().sum();
        let separable_count = d - grouped;
        let mut notes = Vec::new();
        if separable_count != listed_separable {
            notes.push(format!(
                "f{id}: listed {listed_separable} separable variables but groups cover {grouped} of d={d}; separable_count set to {separable_count}"
            ));
        }
        let per_dim = match mode {
            Mode::Default => DEFAULT_PERIOD_PER_DIM,
            Mode::Challenging => CHALLENGING_PERIOD_PER_DIM,
        };
        Ok(ScenarioConfig {
            scenario_id: ScenarioId::Published(id),
            mode,
            seed,
            dimension: d,
            groups: groups.to_vec(),
            separable_count,
            change_period: per_dim * d as u64,
            environments: ENVIRONMENTS,
            ranges: Ranges::published(mode),
            severities: SeverityRanges::published(mode),
            rotation_enabled: true,
            notes,
        })
    }

    /// Sub-function dimensions in construction order.
    pub fn subfunction_dims(&self) -> Vec<usize> {
        let mut dims = self.groups.clone();
        dims.extend(std::iter::repeat_n(1, self.separable_count));
        dims
    }

    pub fn total_budget(&self) -> u64 {
        self.change_period * self.environments as u64
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |field: &str, reason: String| {
            Err(Error::InvalidConfig {
                field: field.to_string(),
                reason,
            })
        };
        if self.dimension == 0 {
            return fail("dimension", "must be positive".into());
        }
        if self.groups.contains(&0) {
            return fail("groups", "group sizes must be positive".into());
        }
        let sum: usize = self.groups.iter().sum::<usize>() + self.separable_count;
        if sum != self.dimension {
            return fail(
                "separable_count",
                format!("groups + separable_count = {sum}, dimension = {}", self.dimension),
            );
        }
        if self.change_period == 0 {
            return fail("change_period", "must be positive".into());
        }
        if self.environments == 0 {
            return fail("environments", "must be positive".into());
        }
        let r = &self.ranges;
        for (name, iv) in [
            ("ranges.search", r.search),
            ("ranges.height", r.height),
            ("ranges.width", r.width),
            ("ranges.angle", r.angle),
            ("ranges.tau", r.tau),
            ("ranges.eta", r.eta),
            ("ranges.weight", r.weight),
        ] {
            if !(iv.min <= iv.max) || !iv.min.is_finite() || !iv.max.is_finite() {
                return fail(name, format!("min {} > max {}", iv.min, iv.max));
            }
        }
        if r.width.min <= 0.0 {
            return fail("ranges.width", "widths must be positive".into());
        }
        if r.weight.min <= 0.0 {
            return fail("ranges.weight", "weights must be positive".into());
        }
        if r.components.min == 0 || r.components.min > r.components.max {
            return fail("ranges.components", "need 1 <= min <= max".into());
        }
        let s = &self.severities;
        for (name, iv) in [
            ("severities.shift", s.shift),
            ("severities.angle", s.angle),
            ("severities.height", s.height),
            ("severities.width", s.width),
            ("severities.tau", s.tau),
            ("severities.eta", s.eta),
        ] {
            if !(iv.min <= iv.max) || iv.min < 0.0 || !iv.max.is_finite() {
                return fail(name, format!("need 0 <= min <= max, got [{}, {}]", iv.min, iv.max));
            }
        }
        Ok(())
    }
}

fn uniform(rng: &mut RandomSource, iv: Interval) -> f64 {
    // ranges are validated before sampling
    rng.next_uniform(iv.min, iv.max)
        .expect("validated interval")
}

/// Samples one sub-function over the given decision-variable indices.
pub fn sample_subfunction(
    rng: &mut RandomSource,
    variable_indices: Vec<usize>,
    ranges: &Ranges,
    severity_ranges: &SeverityRanges,
    rotation_enabled: bool,
) -> Result<SubFunction> {
    let d = variable_indices.len();
    let m = rng.next_int_inclusive(ranges.components.min, ranges.components.max)? as usize;
    let shift = uniform(rng, severity_ranges.shift);
    let angle = uniform(rng, severity_ranges.angle);
    let height = uniform(rng, severity_ranges.height);
    let width = uniform(rng, severity_ranges.width);
    let tau = uniform(rng, severity_ranges.tau);
    let eta = uniform(rng, severity_ranges.eta);
    let severities = SeverityBundle {
        shift,
        height,
        width,
        angle,
        tau,
        eta,
    };
    let weight = uniform(rng, ranges.weight);

    let mut components = Vec::with_capacity(m);
    for _ in 0..m {
        let center = (0..d).map(|_| uniform(rng, ranges.search)).collect();
        let height = uniform(rng, ranges.height);
        let widths = (0..d).map(|_| uniform(rng, ranges.width)).collect();
        let angle = uniform(rng, ranges.angle);
        let tau = uniform(rng, ranges.tau);
        let mut eta = [0.0; 4];
        for e in &mut eta {
            *e = uniform(rng, ranges.eta);
        }
        let rotation = if rotation_enabled && d > 1 {
            random_orthogonal(rng, d)?
        } else {
            DMatrix::identity(d, d)
        };
        components.push(Component {
            center,
            height,
            widths,
            angle,
            rotation,
            tau,
            eta,
        });
    }
    Ok(SubFunction {
        variable_indices,
        components,
        weight,
        severities,
    })
}

/// A freshly built instance together with the stream that will drive its
/// dynamics.
#[derive(Debug, Clone)]
pub struct BuiltScenario {
    pub problem: ProblemInstance,
    pub config: ScenarioConfig,
    pub rng: RandomSource,
}

/// Builds the instance described by `config`.
pub fn instantiate(config: &ScenarioConfig) -> Result<BuiltScenario> {
    config.validate()?;
    let mut rng = RandomSource::new(config.seed);
    let permutation = rng.next_permutation(config.dimension);
    let mut offset = 0;
    let mut sub_functions = Vec::new();
    for d_i in config.subfunction_dims() {
        let indices = permutation[offset..offset + d_i].to_vec();
        offset += d_i;
        sub_functions.push(sample_subfunction(
            &mut rng,
            indices,
            &config.ranges,
            &config.severities,
            config.rotation_enabled,
        )?);
    }
    let problem = ProblemInstance {
        dimension: config.dimension,
        sub_functions,
        bounds: config.ranges.parameter_bounds(),
        environment_index: 0,
    };
    problem.validate()?;
    Ok(BuiltScenario {
        problem,
        config: config.clone(),
        rng,
    })
}

/// Builds published scenario `f{id}`.
pub fn build_scenario(id: u8, mode: Mode, seed: u64) -> Result<BuiltScenario> {
    instantiate(&ScenarioConfig::published(id, mode, seed)?)
}

/// Writes the config as pretty JSON preceded by `#` metadata lines.
pub fn save_config(cfg: &ScenarioConfig, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(cfg).expect("config serializes");
    let mut out = String::new();
    out.push_str(&format!("# gmpb {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("# seed={}\n", cfg.seed));
    out.push_str(&format!("# scenario={}\n", cfg.scenario_id));
    out.push_str(&format!("# mode={}\n", cfg.mode));
    out.push_str(&json);
    out.push('\n');
    std::fs::write(path, out)?;
    Ok(())
}

/// Parses a config document. Leading `#` lines are metadata and are blanked
/// (not removed) so reported line numbers match the file.
pub fn parse_config(text: &str, origin: &Path) -> Result<ScenarioConfig> {
    let mut body = String::with_capacity(text.len());
    let mut in_header = true;
    for line in text.lines() {
        if in_header && line.trim_start().starts_with('#') {
            body.push('\n');
            continue;
        }
        in_header = false;
        body.push_str(line);
        body.push('\n');
    }
    let cfg: ScenarioConfig = serde_json::from_str(&body).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, path)
}
