//! Profile CSVs and JSON reports.
//!
//! CSV cells are written with `{:.16e}` (17 significant digits), so equal
//! inputs give byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::ball::SolveReport;
use crate::barrier::{BarrierData, KValues, SupersolutionReport};
use crate::exhaustion::{EntireSolution, StageReport};
use crate::radial::{EigenPair, RadialGrid, RadialProfile};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("columns have different lengths")]
    Ragged,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Renders `columns` under `header`, one row per node.
pub fn render_csv(header: &[&str], columns: &[&[f64]]) -> Result<String, OutputError> {
    let rows = columns.first().map_or(0, |c| c.len());
    if header.len() != columns.len() || columns.iter().any(|c| c.len() != rows) {
        return Err(OutputError::Ragged);
    }
    let mut out = header.join(",");
    out.push('\n');
    for i in 0..rows {
        for (j, column) in columns.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{:.16e}", column[i]).expect("writing to a String");
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), OutputError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|source| OutputError::Write { path: parent.into(), source })?;
    }
    std::fs::write(path, text).map_err(|source| OutputError::Write { path: path.into(), source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), OutputError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// Columns `r,u,v`.
pub fn solution_csv(solution: &EntireSolution) -> Result<String, OutputError> {
    let r: Vec<f64> = solution.profile.grid.nodes().collect();
    render_csv(&["r", "u", "v"], &[&r, &solution.profile.values, &solution.barrier.values])
}

/// Columns `r,w,v,margin`; the margin at `r = R` is 0.
pub fn barrier_csv(barrier: &BarrierData, report: &SupersolutionReport) -> Result<String, OutputError> {
    let r: Vec<f64> = barrier.grid().nodes().collect();
    render_csv(&["r", "w", "v", "margin"], &[&r, &barrier.w.values, &barrier.v.values, &report.margin])
}

/// Columns `r,phi1`.
pub fn eigen_csv(eig: &EigenPair) -> Result<String, OutputError> {
    let r: Vec<f64> = eig.phi1.grid.nodes().collect();
    render_csv(&["r", "phi1"], &[&r, &eig.phi1.values])
}

/// Scalar description of the last ball of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinalBallSummary {
    pub grid: RadialGrid,
    pub dimension: usize,
    pub gamma: f64,
    pub a: f64,
    pub boundary_value: f64,
    pub gradient_regularization: f64,
    /// `εφ₁`.
    pub low: RadialProfile,
}

/// JSON form of an [`EntireSolution`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveJson<'a> {
    pub certified: bool,
    pub radii_used: &'a [f64],
    pub successive_gaps: &'a [f64],
    pub window_profiles: &'a [RadialProfile],
    pub tail_value: f64,
    pub window_radius: f64,
    pub k: &'a KValues,
    pub c: f64,
    pub stages: &'a [StageReport],
    pub final_solve: Option<&'a SolveReport>,
    pub final_ball: FinalBallSummary,
    pub profile: &'a RadialProfile,
    pub barrier: &'a RadialProfile,
}

impl<'a> SolveJson<'a> {
    pub fn new(solution: &'a EntireSolution) -> SolveJson<'a> {
        let ball = &solution.final_ball;
        SolveJson {
            certified: solution.certified,
            radii_used: &solution.radii_used,
            successive_gaps: &solution.successive_gaps,
            window_profiles: &solution.window_profiles,
            tail_value: solution.tail_value,
            window_radius: solution.window_radius,
            k: &solution.k,
            c: solution.c,
            stages: &solution.stages,
            final_solve: solution.stages.last().map(|s| &s.solve),
            final_ball: FinalBallSummary {
                grid: ball.grid,
                dimension: ball.dimension,
                gamma: ball.gamma,
                a: ball.a,
                boundary_value: ball.boundary_value,
                gradient_regularization: ball.gradient_regularization,
                low: ball.low.clone(),
            },
            profile: &solution.profile,
            barrier: &solution.barrier,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_format_is_fixed() {
        let text = render_csv(&["r", "u"], &[&[0.0, 0.5], &[1.0, 1.0 / 3.0]]).unwrap();
        assert_eq!(
            text,
            "r,u\n0.0000000000000000e0,1.0000000000000000e0\n5.0000000000000000e-1,3.3333333333333331e-1\n"
        );
    }

    #[test]
    fn csv_cells_round_trip() {
        for x in [std::f64::consts::PI, 1e-300, -2.5e17, 0.1 + 0.2] {
            let text = render_csv(&["x"], &[&[x]]).unwrap();
            let cell = text.lines().nth(1).unwrap();
            assert_eq!(cell.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn ragged_columns_are_rejected() {
        assert!(matches!(render_csv(&["a", "b"], &[&[1.0], &[1.0, 2.0]]), Err(OutputError::Ragged)));
        assert!(matches!(render_csv(&["a"], &[&[1.0], &[1.0]]), Err(OutputError::Ragged)));
    }
}
