//! Suite configuration: flags layered over an optional `key = value` file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: expected `key = value`")]
    Syntax { path: PathBuf, line: usize },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {value}")]
    InvalidValue { key: String, value: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum,
)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteId {
    GeodesicCircles,
    ComplexLines,
    Kahler,
    Bilinearity,
    ExpJet,
    Proportionality,
    Rectifier,
    Curvature,
    Gram,
    Momentum,
    FamilySuspension,
    FamilyExterior,
}

impl SuiteId {
    pub const ALL: [SuiteId; 12] = [
        SuiteId::GeodesicCircles,
        SuiteId::ComplexLines,
        SuiteId::Kahler,
        SuiteId::Bilinearity,
        SuiteId::ExpJet,
        SuiteId::Proportionality,
        SuiteId::Rectifier,
        SuiteId::Curvature,
        SuiteId::Gram,
        SuiteId::Momentum,
        SuiteId::FamilySuspension,
        SuiteId::FamilyExterior,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SuiteId::GeodesicCircles => "geodesic-circles",
            SuiteId::ComplexLines => "complex-lines",
            SuiteId::Kahler => "kahler",
            SuiteId::Bilinearity => "bilinearity",
            SuiteId::ExpJet => "exp-jet",
            SuiteId::Proportionality => "proportionality",
            SuiteId::Rectifier => "rectifier",
            SuiteId::Curvature => "curvature",
            SuiteId::Gram => "gram",
            SuiteId::Momentum => "momentum",
            SuiteId::FamilySuspension => "family-suspension",
            SuiteId::FamilyExterior => "family-exterior",
        }
    }

    pub fn is_family(&self) -> bool {
        matches!(self, SuiteId::FamilySuspension | SuiteId::FamilyExterior)
    }

    pub fn default_metric(&self) -> &'static str {
        "fubini:1"
    }

    pub fn default_family(&self) -> Option<&'static str> {
        match self {
            SuiteId::FamilySuspension => Some(SUSPENSION_POINCARE),
            SuiteId::FamilyExterior => Some(EXTERIOR_BALL),
            _ => None,
        }
    }

    pub fn default_samples(&self) -> usize {
        match self {
            SuiteId::GeodesicCircles
            | SuiteId::ComplexLines
            | SuiteId::ExpJet
            | SuiteId::Proportionality => 50,
            SuiteId::Kahler | SuiteId::Bilinearity | SuiteId::Gram => 20,
            SuiteId::Rectifier => 10,
            SuiteId::Curvature => 50,
            SuiteId::Momentum | SuiteId::FamilySuspension => 200,
            SuiteId::FamilyExterior => 50,
        }
    }
}

impl fmt::Display for SuiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteId {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        SuiteId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| ConfigError::Invalid(format!("unknown suite `{s}`")))
    }
}

pub const SUSPENSION_POINCARE: &str = "suspension:poincare";
pub const EXTERIOR_BALL: &str = "exterior-ball";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

pub const DEFAULT_SEED: u64 = 7;

/// Values that may come from a config file or from flags.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub metric: Option<String>,
    pub family: Option<String>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub step: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Overrides {
    /// `other` wins wherever it is set.
    pub fn layered(self, other: Overrides) -> Overrides {
        Overrides {
            metric: other.metric.or(self.metric),
            family: other.family.or(self.family),
            samples: other.samples.or(self.samples),
            seed: other.seed.or(self.seed),
            tol: other.tol.or(self.tol),
            step: other.step.or(self.step),
            out: other.out.or(self.out),
            format: other.format.or(self.format),
        }
    }

    pub fn from_file(path: &Path) -> Result<Overrides, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Overrides::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Overrides, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                path: path.to_owned(),
                line: i + 1,
            })?;
            entries.insert(key.trim().to_owned(), value.trim().to_owned());
        }
        let mut out = Overrides::default();
        for (key, value) in entries {
            let bad = || ConfigError::InvalidValue {
                key: key.clone(),
                value: value.clone(),
            };
            match key.as_str() {
                "metric" => out.metric = Some(value.clone()),
                "family" => out.family = Some(value.clone()),
                "samples" => out.samples = Some(value.parse().map_err(|_| bad())?),
                "seed" => out.seed = Some(value.parse().map_err(|_| bad())?),
                "tol" => out.tol = Some(value.parse().map_err(|_| bad())?),
                "step" => out.step = Some(value.parse().map_err(|_| bad())?),
                "out" => out.out = Some(PathBuf::from(&value)),
                "format" => out.format = Some(Format::from_str(&value, true).map_err(|_| bad())?),
                _ => return Err(ConfigError::UnknownKey(key)),
            }
        }
        Ok(out)
    }
}

/// A fully resolved, validated suite configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub suite: SuiteId,
    pub metric: String,
    pub family: Option<String>,
    pub samples: usize,
    pub seed: u64,
    /// Replaces every tolerance of the suite when set.
    pub tol: Option<f64>,
    /// Finite-difference step override.
    pub step: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl SuiteConfig {
    pub fn new(suite: SuiteId) -> Self {
        SuiteConfig::resolve(suite, Overrides::default()).expect("defaults are valid")
    }

    pub fn resolve(suite: SuiteId, o: Overrides) -> Result<Self, ConfigError> {
        let metric = o
            .metric
            .unwrap_or_else(|| suite.default_metric().to_owned());
        kcircles::metric_from_id(&metric).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let family = match (suite.default_family(), o.family) {
            (Some(expected), Some(f)) if f != expected => {
                return Err(ConfigError::Invalid(format!(
                    "suite {suite} runs family `{expected}`, got `{f}`"
                )))
            }
            (None, Some(f)) => {
                if f != SUSPENSION_POINCARE && f != EXTERIOR_BALL {
                    return Err(ConfigError::Invalid(format!("unknown family `{f}`")));
                }
                Some(f)
            }
            (Some(expected), _) => Some(expected.to_owned()),
            (None, None) => None,
        };
        let samples = o.samples.unwrap_or_else(|| suite.default_samples());
        if samples == 0 {
            return Err(ConfigError::Invalid("samples must be positive".into()));
        }
        for (name, v) in [("tol", o.tol), ("step", o.step)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(ConfigError::Invalid(format!(
                        "{name} must be positive, got {v}"
                    )));
                }
            }
        }
        Ok(SuiteConfig {
            suite,
            metric,
            family,
            samples,
            seed: o.seed.unwrap_or(DEFAULT_SEED),
            tol: o.tol,
            step: o.step,
            out: o.out,
            format: o.format.unwrap_or_default(),
        })
    }

    pub fn with_metric(mut self, metric: &str) -> Self {
        self.metric = metric.to_owned();
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn tolerance(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    pub fn step_or(&self, default: f64) -> f64 {
        self.step.unwrap_or(default)
    }
}
