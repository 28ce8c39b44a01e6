//! Problem instances `-Δu + q|∇u|^a = p u^(-γ)` on R^N and the radial
//! majorant of the source term.

use std::fmt;

use thiserror::Error;

use crate::potential::{PotentialError, PotentialSpec};

/// Number of points on the sign-audit grid.
pub const AUDIT_POINTS: usize = 512;
/// Right end of the sign-audit grid.
pub const AUDIT_RADIUS: f64 = 1.0e4;
/// Smallest positive radius on the sign-audit grid.
const AUDIT_FIRST_POSITIVE: f64 = 1.0e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub dimension: usize,
    pub gamma: f64,
    pub a: f64,
    /// Source coefficient, sampled along rays by the radial solver.
    pub p: PotentialSpec,
    pub q: PotentialSpec,
    /// Radial majorant supplied by the user (required when `p` is not radial).
    pub phi: Option<PotentialSpec>,
    /// Whether `p` is a genuinely radial function of `|x|`.
    pub p_radial: bool,
}

impl Problem {
    pub fn new(dimension: usize, gamma: f64, a: f64, p: PotentialSpec, q: PotentialSpec) -> Self {
        Problem { dimension, gamma, a, p, q, phi: None, p_radial: true }
    }

    pub fn with_majorant(mut self, phi: PotentialSpec) -> Self {
        self.phi = Some(phi);
        self
    }

    pub fn non_radial(mut self) -> Self {
        self.p_radial = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DimensionTooSmall { dimension: usize },
    NonpositiveExponent { name: &'static str, value: f64 },
    PotentialSign { which: &'static str, r: f64, value: f64 },
    PotentialEvaluation { which: &'static str, r: f64, error: PotentialError },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DimensionTooSmall { dimension } => {
                write!(f, "dimension-too-small: N = {dimension}, need N >= 3")
            }
            Violation::NonpositiveExponent { name, value } => {
                write!(f, "nonpositive-exponent: {name} = {value}, need {name} > 0")
            }
            Violation::PotentialSign { which, r, value } => {
                let need = if *which == "p" { "p > 0" } else { "q >= 0" };
                write!(f, "potential-sign-violation: {which}({r}) = {value}, need {need}")
            }
            Violation::PotentialEvaluation { which, r, error } => {
                write!(f, "potential-evaluation-failure: {which} at r = {r}: {error}")
            }
        }
    }
}

/// Every condition a raw problem failed.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid problem:")?;
        for v in &self.violations {
            write!(f, "\n  - {v}")?;
        }
        Ok(())
    }
}

/// Deterministic audit radii: `r = 0` followed by log-spaced points
/// from 1e-6 to 1e4.
pub fn audit_grid() -> Vec<f64> {
    let lo = AUDIT_FIRST_POSITIVE.log10();
    let hi = AUDIT_RADIUS.log10();
    let steps = (AUDIT_POINTS - 2) as f64;
    std::iter::once(0.0).chain((0..AUDIT_POINTS - 1).map(|k| 10f64.powf(lo + (hi - lo) * k as f64 / steps))).collect()
}

fn audit_sign(which: &'static str, spec: &PotentialSpec, strict: bool, violations: &mut Vec<Violation>) {
    for r in audit_grid() {
        match spec.eval(r) {
            Ok(value) if (strict && value > 0.0) || (!strict && value >= 0.0) => {}
            Ok(value) => {
                violations.push(Violation::PotentialSign { which, r, value });
                return;
            }
            Err(error) => {
                violations.push(Violation::PotentialEvaluation { which, r, error });
                return;
            }
        }
    }
}

/// Checks the standing assumptions; the first failing audit radius is
/// reported as the witness for each potential.
pub fn validate_problem(raw: Problem) -> Result<Problem, ValidationReport> {
    let mut violations = Vec::new();
    if raw.dimension < 3 {
        violations.push(Violation::DimensionTooSmall { dimension: raw.dimension });
    }
    for (name, value) in [("gamma", raw.gamma), ("a", raw.a)] {
        if !(value > 0.0) {
            violations.push(Violation::NonpositiveExponent { name, value });
        }
    }
    audit_sign("p", &raw.p, true, &mut violations);
    audit_sign("q", &raw.q, false, &mut violations);
    if let Some(phi) = &raw.phi {
        audit_sign("phi", phi, false, &mut violations);
    }
    if violations.is_empty() {
        Ok(raw)
    } else {
        Err(ValidationReport { violations })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    RadialP,
    UserSupplied,
}

/// Radial majorant `Φ(r) >= p(x)` for `|x| = r`.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorantProfile {
    pub phi: PotentialSpec,
    pub provenance: Provenance,
}

impl MajorantProfile {
    pub fn new(phi: PotentialSpec, provenance: Provenance) -> Self {
        MajorantProfile { phi, provenance }
    }

    pub fn eval(&self, r: f64) -> Result<f64, PotentialError> {
        self.phi.eval(r)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MajorantError {
    #[error("p is not radial and no majorant was supplied; set `phi` to a radial bound of max over |x| = r of p(x)")]
    UnsupportedInstance,
    #[error("supplied majorant is below p at r = {r}: phi = {phi}, p = {p}")]
    BelowSource { r: f64, phi: f64, p: f64 },
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

/// A supplied `phi` always wins; otherwise a radial `p` is its own
/// majorant. When both `p` and `phi` are radial the domination `phi >= p`
/// is audited.
pub fn majorant(problem: &Problem) -> Result<MajorantProfile, MajorantError> {
    match (&problem.phi, problem.p_radial) {
        (Some(phi), radial) => {
            if radial {
                for r in audit_grid() {
                    let (pv, fv) = (problem.p.eval(r)?, phi.eval(r)?);
                    if fv < pv {
                        return Err(MajorantError::BelowSource { r, phi: fv, p: pv });
                    }
                }
            }
            Ok(MajorantProfile::new(phi.clone(), Provenance::UserSupplied))
        }
        (None, true) => Ok(MajorantProfile::new(problem.p.clone(), Provenance::RadialP)),
        (None, false) => Err(MajorantError::UnsupportedInstance),
    }
}
