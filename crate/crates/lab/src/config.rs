//! Experiment configuration: a flat TOML table of run parameters, a `[map]`
//! section naming a catalog map, an optional `[function]` section for the
//! variation pipeline, and an optional `[sweep]` section.

use std::fmt;

use denjoy_core::catalog::{self, DenjoyMap, Example, EX2_DEFAULT_DEPTH};
use denjoy_core::rotation::tune_arnold;
use denjoy_core::CircleDiffeo;
use denjoy_core::catalog::IntervalFunction;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub const GOLDEN: f64 = 0.618_033_988_749_894_8;
pub const SQRT2_M1: f64 = 0.414_213_562_373_095_1;

/// Iterations used when tuning an Arnold map to a target rotation number.
pub const TUNE_ITERATIONS: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    Rotation,
    Variation,
    Crossratio,
    Conjugacy,
    Combinatorics,
    FullCriterion,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Rotation => "rotation",
            Pipeline::Variation => "variation",
            Pipeline::Crossratio => "crossratio",
            Pipeline::Conjugacy => "conjugacy",
            Pipeline::Combinatorics => "combinatorics",
            Pipeline::FullCriterion => "full-criterion",
        }
    }

    /// Stages in execution order.
    pub fn stages(self) -> &'static [&'static str] {
        match self {
            Pipeline::Rotation => &["rotation"],
            Pipeline::Variation => &["variation"],
            Pipeline::Crossratio => &["crossratio"],
            Pipeline::Conjugacy => &["conjugacy"],
            Pipeline::Combinatorics => &["combinatorics"],
            Pipeline::FullCriterion => &["crossratio", "variation", "conjugacy", "criterion"],
        }
    }

    fn needs_map(self) -> bool {
        self != Pipeline::Variation
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A rotation parameter, numeric or one of the named constants
/// `golden` and `sqrt2-1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Alpha {
    Value(f64),
    Named(String),
}

impl Alpha {
    pub fn resolve(&self) -> Option<f64> {
        match self {
            Alpha::Value(v) => Some(*v),
            Alpha::Named(name) => match name.as_str() {
                "golden" => Some(GOLDEN),
                "sqrt2-1" => Some(SQRT2_M1),
                _ => None,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapConfig {
    Identity,
    Rigid {
        alpha: Alpha,
    },
    Arnold {
        alpha: Alpha,
        amplitude: f64,
        /// Treat `alpha` as a target rotation number and solve for the parameter.
        #[serde(default)]
        tune: bool,
    },
    Denjoy {
        alpha: Alpha,
        truncation: usize,
        mass: f64,
    },
    PiecewiseMobius {
        r: f64,
        /// Post-composed rotation.
        #[serde(default)]
        rotate: Option<Alpha>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionConfig {
    Ex1,
    Ex2 {
        #[serde(default = "ex2_depth")]
        depth: u32,
    },
    Ex3 {
        #[serde(default = "ex2_depth")]
        depth: u32,
    },
    /// `log` of the derivative of the configured map over one period.
    LogDerivative,
}

fn ex2_depth() -> u32 {
    EX2_DEFAULT_DEPTH
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EmitSeries {
    All(bool),
    Stages(Vec<String>),
}

impl Default for EmitSeries {
    fn default() -> Self {
        EmitSeries::All(false)
    }
}

impl EmitSeries {
    pub fn enabled(&self, stage: &str) -> bool {
        match self {
            EmitSeries::All(b) => *b,
            EmitSeries::Stages(s) => s.iter().any(|x| x == stage),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// Dotted key into the configuration, e.g. `map.amplitude`.
    pub key: String,
    pub values: Vec<toml::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub pipeline: Pipeline,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub emit_series: EmitSeries,
    /// Rotation iterates.
    #[serde(default = "defaults::n")]
    pub n: u64,
    /// Largest period searched.
    #[serde(default = "defaults::q_max")]
    pub q_max: u64,
    /// Orbit points for the conjugacy analysis.
    #[serde(default = "defaults::budget")]
    pub budget: usize,
    /// Dyadic depth of the variation estimators.
    #[serde(default = "defaults::depth")]
    pub depth: u32,
    #[serde(default = "defaults::crd_depth")]
    pub crd_depth: u32,
    #[serde(default = "defaults::inner_samples")]
    pub inner_samples: usize,
    /// Indices examined by the combinatorics stage.
    #[serde(default = "defaults::indices")]
    pub indices: usize,
    /// Iterates of the wandering arc used for the distortion budget.
    #[serde(default = "defaults::horizon")]
    pub horizon: usize,
    /// Wall-clock limit; stages not started before it expires are skipped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_limit_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

mod defaults {
    pub fn n() -> u64 {
        10_000
    }
    pub fn q_max() -> u64 {
        1000
    }
    pub fn budget() -> usize {
        1000
    }
    pub fn depth() -> u32 {
        16
    }
    pub fn crd_depth() -> u32 {
        8
    }
    pub fn inner_samples() -> usize {
        16
    }
    pub fn indices() -> usize {
        100
    }
    pub fn horizon() -> usize {
        30
    }
}

const STAGES: [&str; 6] = ["rotation", "variation", "crossratio", "conjugacy", "combinatorics", "criterion"];

/// Line of `key` inside `[section]` (or the top level), 1-based.
fn line_of(text: &str, section: Option<&str>, key: &str) -> usize {
    let mut current: Option<String> = None;
    let mut header_line = 1;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('[') {
            current = Some(rest.trim_end_matches(']').trim().to_string());
            if current.as_deref() == section {
                header_line = i + 1;
            }
            continue;
        }
        if current.as_deref() == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return i + 1;
                }
            }
        }
    }
    header_line
}

impl Config {
    /// Parses and validates; `path` only labels diagnostics.
    pub fn parse(text: &str, path: &str) -> Result<Config> {
        let cfg: Config =
            toml::from_str(text).map_err(|e| LabError::Parse { path: path.to_string(), message: e.to_string() })?;
        cfg.validate().map_err(|(section, field, message)| LabError::Field {
            path: path.to_string(),
            line: line_of(text, section, field),
            field: match section {
                Some(s) => format!("{s}.{field}"),
                None => field.to_string(),
            },
            message,
        })?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Read(path.to_path_buf(), e))?;
        Config::parse(&text, &path.display().to_string())
    }

    fn validate(&self) -> std::result::Result<(), (Option<&'static str>, &'static str, String)> {
        let top = |field, msg: String| Err((None, field, msg));
        let map = |field, msg: String| Err((Some("map"), field, msg));
        if self.n == 0 {
            return top("n", "must be at least 1".into());
        }
        if self.budget < 100 {
            return top("budget", format!("{} is below the minimum of 100", self.budget));
        }
        if !(1..=30).contains(&self.depth) {
            return top("depth", format!("{} outside 1..=30", self.depth));
        }
        if !(1..=20).contains(&self.crd_depth) {
            return top("crd_depth", format!("{} outside 1..=20", self.crd_depth));
        }
        if self.horizon == 0 {
            return top("horizon", "must be at least 1".into());
        }
        if let Some(t) = self.time_limit_s {
            if !(t > 0.0) {
                return top("time_limit_s", format!("{t} is not positive"));
            }
        }
        if let EmitSeries::Stages(s) = &self.emit_series {
            if let Some(bad) = s.iter().find(|x| !STAGES.contains(&x.as_str())) {
                return top("emit_series", format!("unknown stage `{bad}`; stages are {}", STAGES.join(", ")));
            }
        }
        match &self.map {
            None if self.pipeline.needs_map() => {
                return Err((Some("map"), "kind", format!("a [map] section is required by pipeline `{}`", self.pipeline)))
            }
            None if self.function.is_none() || self.function == Some(FunctionConfig::LogDerivative) => {
                return Err((
                    Some("function"),
                    "kind",
                    "log_derivative needs a [map] section; otherwise name an example (ex1, ex2, ex3)".into(),
                ))
            }
            Some(m) => {
                let alphas: Vec<&Alpha> = match m {
                    MapConfig::Identity => vec![],
                    MapConfig::Rigid { alpha } | MapConfig::Arnold { alpha, .. } | MapConfig::Denjoy { alpha, .. } => {
                        vec![alpha]
                    }
                    MapConfig::PiecewiseMobius { rotate, .. } => rotate.iter().collect(),
                };
                for a in alphas {
                    if a.resolve().is_none() {
                        let field = if matches!(m, MapConfig::PiecewiseMobius { .. }) { "rotate" } else { "alpha" };
                        return map(field, format!("unknown constant {a:?}; use a number, \"golden\" or \"sqrt2-1\""));
                    }
                }
                match m {
                    MapConfig::Arnold { amplitude, .. } if !(0.0..1.0).contains(amplitude) => {
                        return map("amplitude", format!("{amplitude} outside [0, 1)"))
                    }
                    MapConfig::Denjoy { truncation, mass, .. } => {
                        if *truncation == 0 {
                            return map("truncation", "must be at least 1".into());
                        }
                        if !(*mass > 0.0 && *mass < 1.0) {
                            return map("mass", format!("{mass} outside (0, 1)"));
                        }
                    }
                    MapConfig::PiecewiseMobius { r, .. } if !(*r > 0.0) => {
                        return map("r", format!("{r} is not positive"))
                    }
                    _ => {}
                }
            }
            None => {}
        }
        if let Some(FunctionConfig::Ex3 { depth: 0 }) = self.function {
            return Err((Some("function"), "depth", "ex3 needs depth >= 1".into()));
        }
        Ok(())
    }

    /// One configuration per sweep value, each without the sweep section.
    pub fn expand_sweep(&self) -> Result<Vec<(toml::Value, Config)>> {
        let Some(sweep) = &self.sweep else {
            return Ok(vec![]);
        };
        let mut base = self.clone();
        base.sweep = None;
        let base = toml::Value::try_from(&base).map_err(|e| LabError::Parse {
            path: "sweep".into(),
            message: e.to_string(),
        })?;
        let key = sweep.key.clone();
        let err = |index, message: String| LabError::Sweep { key: key.clone(), index, message };
        let mut out = Vec::with_capacity(sweep.values.len());
        for (i, v) in sweep.values.iter().enumerate() {
            let mut variant = base.clone();
            let mut slot = &mut variant;
            let parts: Vec<&str> = sweep.key.split('.').collect();
            for (depth, part) in parts.iter().enumerate() {
                let table = slot.as_table_mut().ok_or_else(|| err(i, format!("`{part}` is not inside a table")))?;
                if depth + 1 == parts.len() {
                    table.insert(part.to_string(), v.clone());
                    break;
                }
                slot = table.get_mut(*part).ok_or_else(|| err(i, format!("no section `{part}`")))?;
            }
            let cfg: Config = variant.try_into().map_err(|e: toml::de::Error| err(i, e.message().to_string()))?;
            cfg.validate().map_err(|(s, f, m)| {
                err(i, format!("{}{f}: {m}", s.map(|s| format!("{s}.")).unwrap_or_default()))
            })?;
            out.push((v.clone(), cfg));
        }
        Ok(out)
    }
}

/// A map built from its configuration. The Denjoy construction keeps its
/// inserted arcs for the stages that use them.
pub enum BuiltMap {
    Plain(CircleDiffeo),
    Denjoy(Box<DenjoyMap>),
}

impl BuiltMap {
    pub fn diffeo(&self) -> &CircleDiffeo {
        match self {
            BuiltMap::Plain(f) => f,
            BuiltMap::Denjoy(d) => &d.base,
        }
    }

    pub fn denjoy(&self) -> Option<&DenjoyMap> {
        match self {
            BuiltMap::Denjoy(d) => Some(d),
            BuiltMap::Plain(_) => None,
        }
    }
}

pub fn build_map(m: &MapConfig) -> Result<BuiltMap> {
    let alpha = |a: &Alpha| a.resolve().expect("validated");
    Ok(match m {
        MapConfig::Identity => BuiltMap::Plain(catalog::identity()),
        MapConfig::Rigid { alpha: a } => BuiltMap::Plain(catalog::rigid(alpha(a))),
        MapConfig::Arnold { alpha: a, amplitude, tune: false } => BuiltMap::Plain(catalog::arnold(alpha(a), *amplitude)?),
        MapConfig::Arnold { alpha: a, amplitude, tune: true } => {
            BuiltMap::Plain(tune_arnold(*amplitude, alpha(a), TUNE_ITERATIONS)?.1)
        }
        MapConfig::Denjoy { alpha: a, truncation, mass } => {
            BuiltMap::Denjoy(Box::new(catalog::make_denjoy(alpha(a), *truncation, *mass)?))
        }
        MapConfig::PiecewiseMobius { r, rotate } => {
            let f = catalog::piecewise_mobius(*r)?;
            match rotate {
                Some(a) => BuiltMap::Plain(catalog::rigid(alpha(a)).compose(&f)),
                None => BuiltMap::Plain(f),
            }
        }
    })
}

pub fn build_function(cfg: &Config, map: Option<&BuiltMap>) -> Result<IntervalFunction> {
    let f = match cfg.function.as_ref().unwrap_or(&FunctionConfig::LogDerivative) {
        FunctionConfig::Ex1 => catalog::example_function(Example::Ex1, 0)?,
        FunctionConfig::Ex2 { depth } => catalog::example_function(Example::Ex2, *depth)?,
        FunctionConfig::Ex3 { depth } => catalog::example_function(Example::Ex3, *depth)?,
        FunctionConfig::LogDerivative => {
            IntervalFunction::log_derivative(map.expect("validated").diffeo(), 0.0, 1.0)?
        }
    };
    Ok(f)
}
