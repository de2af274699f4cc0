//! Scenario configuration: a flat `key = value` format with sections.
//!
//! ```text
//! # comments start with '#'
//! [model]
//! preset = fig4          # optional, later keys override it
//! kind = random_ou       # deterministic | random_ou | ito | stratonovich
//! s_in = 4
//! d = 2
//! ...
//! [noise]
//! beta = 1
//! gamma = 0.2
//! seeds = 0..20          # or a comma-separated list
//! ```
//!
//! Unknown sections and keys are rejected with the offending line number.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chemostat_core::analysis::DilutionBand;
use chemostat_core::models::{AssumptionWarning, ChemostatParams, State3};
use chemostat_core::noise::OUParams;
use chemostat_core::TimeGrid;
use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::presets;

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_NOISE_DT: f64 = 5e-4;
pub const DEFAULT_T_END: f64 = 20.0;
/// Initial state used by most published runs.
pub const DEFAULT_INIT: State3 = State3::new(2.5, 2.0, 2.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Deterministic,
    RandomOu,
    StochasticIto,
    StochasticStratonovich,
}

impl ModelKind {
    pub fn is_white_noise(self) -> bool {
        matches!(self, Self::StochasticIto | Self::StochasticStratonovich)
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "deterministic" => Ok(Self::Deterministic),
            "random_ou" | "random" | "ou" => Ok(Self::RandomOu),
            "ito" | "stochastic_ito" => Ok(Self::StochasticIto),
            "stratonovich" | "stochastic_stratonovich" => Ok(Self::StochasticStratonovich),
            other => Err(format!("unknown model kind `{other}`")),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Deterministic => "deterministic",
            Self::RandomOu => "random_ou",
            Self::StochasticIto => "ito",
            Self::StochasticStratonovich => "stratonovich",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum BandChoice {
    /// `D -/+ alpha q sigma` from the noise parameters.
    Auto,
    Fixed {
        b1: f64,
        b2: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format `{other}` (csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub format: Format,
    pub prefix: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub name: Option<String>,
    pub model: ModelKind,
    pub params: ChemostatParams,
    /// O-U parameters. For white-noise models they define the `z*` used in
    /// the sigma-kappa change of variables (default `beta = gamma = 1`).
    pub noise: Option<OUParams>,
    pub noise_dt: f64,
    pub band: BandChoice,
    pub init: State3,
    pub grid: TimeGrid,
    pub seeds: Vec<u64>,
    /// Reversion rates for the O-U columns of a model comparison.
    pub compare_betas: Vec<f64>,
    pub output: OutputConfig,
    /// Assumptions recorded by presets.
    pub notes: Vec<String>,
    pub warnings: Vec<AssumptionWarning>,
}

impl ScenarioConfig {
    pub fn noise_grid(&self) -> Result<TimeGrid> {
        Ok(TimeGrid::spanning(
            self.grid.t0(),
            self.grid.t_end(),
            self.noise_dt,
        )?)
    }

    /// The dilution band used by the analysis.
    pub fn dilution_band(&self) -> Result<DilutionBand> {
        Ok(match self.band {
            BandChoice::Fixed { b1, b2 } => DilutionBand::new(b1, b2)?,
            BandChoice::Auto => {
                let ou = match self.model {
                    ModelKind::Deterministic => None,
                    _ => self.noise,
                };
                DilutionBand::auto(&self.params, ou)?
            }
        })
    }

    /// Same scenario with a different reversion rate.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        let gamma = self
            .noise
            .ok_or_else(|| HarnessError::Config("no noise parameters to vary".into()))?
            .gamma();
        Ok(Self {
            noise: Some(OUParams::new(beta, gamma)?),
            ..self.clone()
        })
    }
}

/// One `key = value` line.
#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

/// Parsed but unresolved configuration: `section.key -> entry`.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<(String, String), Entry>,
}

const KEYS: &[(&str, &[&str])] = &[
    (
        "model",
        &[
            "preset", "name", "kind", "s_in", "d", "dilution", "a", "m", "b", "nu", "c", "r1",
            "r2", "alpha",
        ],
    ),
    (
        "noise",
        &["beta", "gamma", "noise_dt", "seeds", "compare_betas"],
    ),
    ("band", &["mode", "b1", "b2"]),
    ("init", &["s", "x1", "x2"]),
    ("grid", &["t0", "t_end", "dt"]),
    ("output", &["dir", "format", "prefix"]),
];

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = Self::default();
        let mut section: Option<String> = None;
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| HarnessError::parse(lineno, "unterminated section header"))?
                    .trim()
                    .to_ascii_lowercase();
                if !KEYS.iter().any(|(s, _)| *s == name) {
                    return Err(HarnessError::parse(
                        lineno,
                        format!("unknown section [{name}]"),
                    ));
                }
                section = Some(name);
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::parse(lineno, format!("expected `key = value`, found `{line}`"))
            })?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            let sec = section.clone().ok_or_else(|| {
                HarnessError::parse(lineno, format!("`{key}` appears before any section header"))
            })?;
            let known = KEYS
                .iter()
                .find(|(s, _)| *s == sec)
                .map(|(_, k)| *k)
                .unwrap_or(&[]);
            if !known.contains(&key.as_str()) {
                return Err(HarnessError::parse(
                    lineno,
                    format!("unknown key `{key}` in [{sec}]"),
                ));
            }
            if value.is_empty() {
                return Err(HarnessError::parse(lineno, format!("`{key}` has no value")));
            }
            let canonical = if key == "dilution" {
                "d".to_string()
            } else {
                key
            };
            let slot = (sec, canonical);
            if let Some(prev) = raw.entries.get(&slot) {
                return Err(HarnessError::parse(
                    lineno,
                    format!("`{}` already set on line {}", slot.1, prev.line),
                ));
            }
            raw.entries.insert(
                slot,
                Entry {
                    value: value.to_string(),
                    line: lineno,
                },
            );
        }
        Ok(raw)
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn take<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.get(section, key)
            .map(|e| {
                e.value
                    .parse::<T>()
                    .map_err(|err| HarnessError::parse(e.line, format!("`{key}`: {err}")))
            })
            .transpose()
    }

    /// `self` with every entry of `over` replacing the matching one.
    fn overlay(mut self, over: &RawConfig) -> Self {
        for (k, v) in &over.entries {
            self.entries.insert(k.clone(), v.clone());
        }
        self
    }

    fn preset_name(&self) -> Option<&str> {
        self.get("model", "preset").map(|e| e.value.as_str())
    }
}

fn parse_list<T: FromStr>(entry: &Entry, key: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    entry
        .value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|err| HarnessError::parse(entry.line, format!("`{key}`: `{s}`: {err}")))
        })
        .collect()
}

fn parse_seeds(entry: &Entry) -> Result<Vec<u64>> {
    if let Some((lo, hi)) = entry.value.split_once("..") {
        let bound = |s: &str| {
            s.trim()
                .parse::<u64>()
                .map_err(|err| HarnessError::parse(entry.line, format!("`seeds`: {err}")))
        };
        let (lo, hi) = (bound(lo)?, bound(hi)?);
        if hi <= lo {
            return Err(HarnessError::parse(entry.line, "`seeds`: empty range"));
        }
        return Ok((lo..hi).collect());
    }
    parse_list(entry, "seeds")
}

/// Expands `preset = NAME` chains, innermost first.
fn expand(raw: RawConfig, depth: usize) -> Result<RawConfig> {
    let Some(name) = raw.preset_name().map(str::to_string) else {
        return Ok(raw);
    };
    if depth > 8 {
        return Err(HarnessError::Config(format!(
            "preset `{name}` nests too deeply"
        )));
    }
    let base = presets::raw(&name)?;
    let mut base = expand(base, depth + 1)?;
    let inherited = ("model".to_string(), "name".to_string());
    if base.entries.get(&inherited).is_some_and(|e| e.line == 0) {
        base.entries.remove(&inherited);
    }
    let mut merged = base.overlay(&raw);
    merged.entries.remove(&("model".into(), "preset".into()));
    // keep the outermost preset name as the scenario name unless one is given
    if merged.get("model", "name").is_none() {
        merged.entries.insert(
            ("model".into(), "name".into()),
            Entry {
                value: name,
                line: 0,
            },
        );
    }
    Ok(merged)
}

fn resolve(raw: &RawConfig, notes: Vec<String>) -> Result<ScenarioConfig> {
    let model: ModelKind = raw
        .take("model", "kind")?
        .unwrap_or(ModelKind::Deterministic);
    let required = |key: &str| -> Result<f64> {
        raw.take::<f64>("model", key)?
            .ok_or_else(|| HarnessError::Config(format!("[model] is missing `{key}`")))
    };
    let alpha = match model {
        ModelKind::Deterministic => raw.take("model", "alpha")?.unwrap_or(0.0),
        _ => required("alpha")?,
    };
    let params = ChemostatParams {
        s_in: required("s_in")?,
        dilution: required("d")?,
        a: required("a")?,
        m: required("m")?,
        b: required("b")?,
        nu: required("nu")?,
        c: required("c")?,
        r1: required("r1")?,
        r2: required("r2")?,
        alpha,
    };
    let warnings = params.validate_lenient()?;

    let beta: Option<f64> = raw.take("noise", "beta")?;
    let gamma: Option<f64> = raw.take("noise", "gamma")?;
    let noise = match (model, beta, gamma) {
        (ModelKind::RandomOu, Some(b), Some(g)) => Some(OUParams::new(b, g)?),
        (ModelKind::RandomOu, _, _) => {
            return Err(HarnessError::Config(
                "model random_ou needs [noise] beta and gamma".into(),
            ))
        }
        (ModelKind::Deterministic, None, None) => None,
        (ModelKind::Deterministic, b, g) => {
            Some(OUParams::new(b.unwrap_or(1.0), g.unwrap_or(1.0))?)
        }
        (_, b, g) => Some(OUParams::new(b.unwrap_or(1.0), g.unwrap_or(1.0))?),
    };

    let seeds = match raw.get("noise", "seeds") {
        Some(e) => parse_seeds(e)?,
        None if model == ModelKind::Deterministic => vec![0],
        None => {
            return Err(HarnessError::Config(format!(
                "model {model} needs [noise] seeds"
            )))
        }
    };
    if seeds.is_empty() {
        return Err(HarnessError::Config("seeds must not be empty".into()));
    }
    let compare_betas = match raw.get("noise", "compare_betas") {
        Some(e) => parse_list::<f64>(e, "compare_betas")?,
        None => Vec::new(),
    };

    let b1: Option<f64> = raw.take("band", "b1")?;
    let b2: Option<f64> = raw.take("band", "b2")?;
    let mode: Option<String> = raw.take("band", "mode")?;
    let band = match (mode.as_deref(), b1, b2) {
        (Some("auto"), None, None) | (None, None, None) => BandChoice::Auto,
        (Some("fixed") | None, Some(b1), Some(b2)) => {
            DilutionBand::new(b1, b2)?;
            BandChoice::Fixed { b1, b2 }
        }
        (Some("auto"), _, _) => {
            return Err(HarnessError::Config("band mode auto takes no b1/b2".into()))
        }
        (Some(m), _, _) if m != "fixed" => {
            return Err(HarnessError::Config(format!(
                "unknown band mode `{m}` (auto or fixed)"
            )))
        }
        _ => {
            return Err(HarnessError::Config(
                "a fixed band needs both b1 and b2".into(),
            ))
        }
    };

    let init = State3::new(
        raw.take("init", "s")?.unwrap_or(DEFAULT_INIT.s),
        raw.take("init", "x1")?.unwrap_or(DEFAULT_INIT.x1),
        raw.take("init", "x2")?.unwrap_or(DEFAULT_INIT.x2),
    );
    if [init.s, init.x1, init.x2]
        .iter()
        .any(|v| !(v.is_finite() && *v >= 0.0))
    {
        return Err(HarnessError::Config(format!(
            "initial state must be finite and nonnegative, got {init:?}"
        )));
    }

    let t0 = raw.take("grid", "t0")?.unwrap_or(0.0);
    let t_end = raw.take("grid", "t_end")?.unwrap_or(DEFAULT_T_END);
    let dt = raw.take("grid", "dt")?.unwrap_or(DEFAULT_DT);
    let grid = TimeGrid::spanning(t0, t_end, dt)?;
    let noise_dt = raw.take("noise", "noise_dt")?.unwrap_or(DEFAULT_NOISE_DT);
    let noise_grid = TimeGrid::spanning(t0, t_end, noise_dt)?;
    if model != ModelKind::Deterministic {
        noise_grid.embedding_of(&grid).map_err(|_| {
            HarnessError::Config(format!(
                "noise_dt = {noise_dt} must divide dt = {dt} an integer number of times"
            ))
        })?;
    }

    let output = OutputConfig {
        dir: raw.take::<String>("output", "dir")?.map(PathBuf::from),
        format: raw.take("output", "format")?.unwrap_or_default(),
        prefix: raw.take("output", "prefix")?,
    };

    Ok(ScenarioConfig {
        name: raw.take("model", "name")?,
        model,
        params,
        noise,
        noise_dt,
        band,
        init,
        grid,
        seeds,
        compare_betas,
        output,
        notes,
        warnings,
    })
}

/// Parses config text. `preset`, when given, is applied beneath the file's
/// own keys (as if the file started with `preset = NAME`).
pub fn parse_config(text: &str, preset: Option<&str>) -> Result<ScenarioConfig> {
    let mut raw = RawConfig::parse(text)?;
    if let Some(name) = preset {
        if raw.preset_name().is_none() {
            raw.entries.insert(
                ("model".into(), "preset".into()),
                Entry {
                    value: name.to_string(),
                    line: 0,
                },
            );
        }
    }
    let mut notes = Vec::new();
    let mut cursor = raw.preset_name().map(str::to_string);
    while let Some(name) = cursor {
        notes.extend(presets::notes(&name)?.iter().map(|s| s.to_string()));
        cursor = presets::raw(&name)?.preset_name().map(str::to_string);
    }
    resolve(&expand(raw, 0)?, notes)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_config(&text, None)
}
