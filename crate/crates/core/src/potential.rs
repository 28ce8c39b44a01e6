//! Radial coefficient functions: parsed expressions, a few closed-form
//! families, and arbitrary closures for library callers.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{DomainError, Expr, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("potential is not finite at r = {r} (value {value})")]
    NotFinite { r: f64, value: f64 },
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
    #[error("builtin `{name}` expects {expected} parameter(s), got {got}")]
    BuiltinArity { name: String, expected: usize, got: usize },
}

/// Closed-form families, all with amplitude `amp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    /// `amp`
    Constant { amp: f64 },
    /// `amp * (1 + r)^(-alpha)`
    Algebraic { amp: f64, alpha: f64 },
    /// `amp * (1 + r^2)^(-alpha/2)`
    Rational { amp: f64, alpha: f64 },
    /// `amp * exp(-rate * r)`
    Exponential { amp: f64, rate: f64 },
    /// `amp * exp(-r^2 / width^2)`
    Gaussian { amp: f64, width: f64 },
}

impl Builtin {
    fn eval(&self, r: f64) -> f64 {
        match *self {
            Builtin::Constant { amp } => amp,
            Builtin::Algebraic { amp, alpha } => amp * (1.0 + r).powf(-alpha),
            Builtin::Rational { amp, alpha } => amp * (1.0 + r * r).powf(-0.5 * alpha),
            Builtin::Exponential { amp, rate } => amp * (-rate * r).exp(),
            Builtin::Gaussian { amp, width } => amp * (-(r * r) / (width * width)).exp(),
        }
    }

    /// Parses `name(p1, p2)`, e.g. `algebraic(1, 3)`.
    pub fn parse(text: &str) -> Result<Builtin, PotentialError> {
        let text = text.trim();
        let (name, args) = match text.find('(') {
            Some(open) if text.ends_with(')') => (&text[..open], &text[open + 1..text.len() - 1]),
            _ => (text, ""),
        };
        let name = name.trim();
        let params = args
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| ParseError::Syntax { pos: 0, msg: format!("bad builtin parameter `{s}`") }.into())
            })
            .collect::<Result<Vec<f64>, PotentialError>>()?;
        let arity = |expected: usize| -> Result<(), PotentialError> {
            if params.len() == expected {
                Ok(())
            } else {
                Err(PotentialError::BuiltinArity { name: name.to_string(), expected, got: params.len() })
            }
        };
        Ok(match name {
            "constant" => {
                arity(1)?;
                Builtin::Constant { amp: params[0] }
            }
            "algebraic" => {
                arity(2)?;
                Builtin::Algebraic { amp: params[0], alpha: params[1] }
            }
            "rational" => {
                arity(2)?;
                Builtin::Rational { amp: params[0], alpha: params[1] }
            }
            "exponential" => {
                arity(2)?;
                Builtin::Exponential { amp: params[0], rate: params[1] }
            }
            "gaussian" => {
                arity(2)?;
                Builtin::Gaussian { amp: params[0], width: params[1] }
            }
            other => return Err(PotentialError::UnknownBuiltin(other.to_string())),
        })
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Constant { amp } => write!(f, "constant({amp})"),
            Builtin::Algebraic { amp, alpha } => write!(f, "algebraic({amp}, {alpha})"),
            Builtin::Rational { amp, alpha } => write!(f, "rational({amp}, {alpha})"),
            Builtin::Exponential { amp, rate } => write!(f, "exponential({amp}, {rate})"),
            Builtin::Gaussian { amp, width } => write!(f, "gaussian({amp}, {width})"),
        }
    }
}

type RadialFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A radial function `r -> value`, immutable once built and cheap to clone.
#[derive(Clone)]
pub enum PotentialSpec {
    Expr { source: String, compiled: Arc<Expr> },
    Builtin(Builtin),
    Custom { label: String, f: Arc<RadialFn> },
}

/// Prefix selecting a builtin family in textual specs.
pub const BUILTIN_PREFIX: &str = "builtin:";

impl PotentialSpec {
    /// Parses a DSL expression, or a `builtin:name(params)` tag.
    pub fn parse(source: &str) -> Result<PotentialSpec, PotentialError> {
        if let Some(rest) = source.trim().strip_prefix(BUILTIN_PREFIX) {
            return Ok(PotentialSpec::Builtin(Builtin::parse(rest)?));
        }
        let compiled = Expr::parse(source)?;
        Ok(PotentialSpec::Expr { source: source.trim().to_string(), compiled: Arc::new(compiled) })
    }

    pub fn constant(value: f64) -> PotentialSpec {
        PotentialSpec::Builtin(Builtin::Constant { amp: value })
    }

    pub fn from_fn<F>(label: impl Into<String>, f: F) -> PotentialSpec
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        PotentialSpec::Custom { label: label.into(), f: Arc::new(f) }
    }

    /// Evaluates at `r`; non-finite values are errors.
    pub fn eval(&self, r: f64) -> Result<f64, PotentialError> {
        let value = match self {
            PotentialSpec::Expr { compiled, .. } => compiled.eval(r)?,
            PotentialSpec::Builtin(b) => b.eval(r),
            PotentialSpec::Custom { f, .. } => f(r),
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(PotentialError::NotFinite { r, value })
        }
    }

    /// Samples at every point of `rs`.
    pub fn sample(&self, rs: impl IntoIterator<Item = f64>) -> Result<Vec<f64>, PotentialError> {
        rs.into_iter().map(|r| self.eval(r)).collect()
    }

    /// Textual form accepted by [`PotentialSpec::parse`] (custom closures
    /// only render their label).
    pub fn source(&self) -> String {
        match self {
            PotentialSpec::Expr { source, .. } => source.clone(),
            PotentialSpec::Builtin(b) => format!("{BUILTIN_PREFIX}{b}"),
            PotentialSpec::Custom { label, .. } => label.clone(),
        }
    }
}

impl fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PotentialSpec({})", self.source())
    }
}

impl PartialEq for PotentialSpec {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (PotentialSpec::Expr { compiled: a, .. }, PotentialSpec::Expr { compiled: b, .. }) => a == b,
            (PotentialSpec::Builtin(a), PotentialSpec::Builtin(b)) => a == b,
            (PotentialSpec::Custom { f: a, .. }, PotentialSpec::Custom { f: b, .. }) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}
