//! Sectioned `key = value` run configuration.
//!
//! ```text
//! [problem]
//! N = 3
//! gamma = 1
//! a = 2
//! p = "(1+r^2)^(-2)"
//! q = "0"
//!
//! [solver]
//! h = 0.01
//!
//! [output]
//! dir = "out"
//! formats = ["csv", "json"]
//! ```
//!
//! Unknown keys and missing required keys are errors.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::exhaustion::{geometric_radii, ExhaustionConfig};
use crate::model::Problem;
use crate::potential::{PotentialError, PotentialSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("missing required key `{key}`")]
    MissingKey { key: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid `{key}`: {source}")]
    Potential { key: &'static str, source: PotentialError },
    #[error("{0}")]
    Serialize(String),
}

/// A potential given either as an expression or as a number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PotentialText(pub String);

impl PotentialText {
    pub fn new(text: impl Into<String>) -> PotentialText {
        PotentialText(text.into())
    }

    pub fn compile(&self, key: &'static str) -> Result<PotentialSpec, ConfigError> {
        PotentialSpec::parse(&self.0).map_err(|source| ConfigError::Potential { key, source })
    }
}

impl Serialize for PotentialText {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for PotentialText {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct TextOrNumber;
        impl Visitor<'_> for TextOrNumber {
            type Value = PotentialText;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an expression string or a number")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<PotentialText, E> {
                Ok(PotentialText::new(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<PotentialText, E> {
                Ok(PotentialText(v.to_string()))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<PotentialText, E> {
                Ok(PotentialText(v.to_string()))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<PotentialText, E> {
                Ok(PotentialText(format!("{v:?}")))
            }
        }
        d.deserialize_any(TextOrNumber)
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    #[serde(rename = "N")]
    pub dimension: usize,
    pub gamma: f64,
    pub a: f64,
    pub p: PotentialText,
    pub q: PotentialText,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PotentialText>,
    /// `p` depends on `|x|` only.
    #[serde(default = "yes")]
    pub p_radial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub h: f64,
    /// Explicit schedule; overrides `r0`/`levels`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    pub r0: f64,
    pub levels: usize,
    pub cauchy_tol: f64,
    pub tail_tol: f64,
    pub newton_tol: f64,
    pub max_iter: usize,
    pub quad_tol: f64,
    pub eigen_tol: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = ExhaustionConfig::default();
        SolverSection {
            h: d.h,
            radii: None,
            r0: d.radii[0],
            levels: d.radii.len(),
            cauchy_tol: d.cauchy_tol,
            tail_tol: d.tail_tol,
            newton_tol: d.newton_tol,
            max_iter: d.max_iter,
            quad_tol: d.quad_tol,
            eigen_tol: d.eigen_tol,
        }
    }
}

impl SolverSection {
    pub fn exhaustion(&self) -> ExhaustionConfig {
        ExhaustionConfig {
            radii: self.radii.clone().unwrap_or_else(|| geometric_radii(self.r0, self.levels)),
            h: self.h,
            cauchy_tol: self.cauchy_tol,
            tail_tol: self.tail_tol,
            newton_tol: self.newton_tol,
            max_iter: self.max_iter,
            quad_tol: self.quad_tol,
            eigen_tol: self.eigen_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out"), formats: vec![Format::Csv, Format::Json] }
    }
}

impl OutputSection {
    pub fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfig {
    /// Compiles the potentials; no validation beyond parsing.
    pub fn problem(&self) -> Result<Problem, ConfigError> {
        let s = &self.problem;
        let mut problem = Problem::new(s.dimension, s.gamma, s.a, s.p.compile("p")?, s.q.compile("q")?);
        if let Some(phi) = &s.phi {
            problem = problem.with_majorant(phi.compile("phi")?);
        }
        if !s.p_radial {
            problem = problem.non_radial();
        }
        Ok(problem)
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

fn backticked(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_string())
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |s| line_of(text, s.start));
        let message = e.message().trim().to_string();
        match backticked(&message) {
            Some(key) if message.starts_with("unknown field") => ConfigError::UnknownKey { line, key },
            Some(key) if message.starts_with("missing field") => ConfigError::MissingKey { key },
            _ => ConfigError::Parse { line, message },
        }
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
    parse_config(&text)
}

pub fn render_config(config: &RunConfig) -> Result<String, ConfigError> {
    toml::to_string(config).map_err(|e| ConfigError::Serialize(e.to_string()))
}

pub fn save_config(config: &RunConfig, path: &Path) -> Result<(), ConfigError> {
    let text = render_config(config)?;
    std::fs::write(path, text).map_err(|source| ConfigError::Write { path: path.to_path_buf(), source })
}
