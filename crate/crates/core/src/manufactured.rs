//! Manufactured solutions: `u*(r) = (1+r²)^(-1/2)` with the source chosen
//! so that `u*` solves the equation exactly.
//!
//! In N dimensions `-Δu* = (N + (N-3)r²)(1+r²)^(-5/2)` and
//! `|∇u*| = r(1+r²)^(-3/2)`, so with constant `q` the source is
//!
//! ```text
//! p(r) = [(N + (N-3)r²)(1+r²)^(-5/2) + q r^a (1+r²)^(-3a/2)] (1+r²)^(-γ/2).
//! ```

use serde::Serialize;

use crate::ball::{solve_ball, SolveReport};
use crate::barrier::compute_k;
use crate::exhaustion::{bracketed_ball, BracketedBall, ExhaustionError};
use crate::model::{majorant, Problem};
use crate::potential::PotentialSpec;
use crate::radial::{RadialGrid, RadialProfile};

/// Grid-refinement study on a ball with exact Dirichlet data `u*(R)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub radius: f64,
    /// Coarse spacing first.
    pub spacings: Vec<f64>,
    /// `max |u - u*|` over the grid for each spacing.
    pub max_errors: Vec<f64>,
    /// `log2(e(h) / e(h/2))`.
    pub observed_order: f64,
    pub reports: Vec<SolveReport>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manufactured {
    pub dimension: usize,
    pub gamma: f64,
    /// Constant gradient coefficient.
    pub q: f64,
    pub a: f64,
}

impl Manufactured {
    pub fn new(dimension: usize, gamma: f64, q: f64, a: f64) -> Manufactured {
        Manufactured { dimension, gamma, q, a }
    }

    pub fn exact(&self, r: f64) -> f64 {
        (1.0 + r * r).powf(-0.5)
    }

    /// Source term as an expression in the potential language.
    pub fn source_expression(&self) -> String {
        let n = self.dimension as f64;
        let mut diffusion = format!("({n} + {}*r^2)*(1+r^2)^(-2.5)", n - 3.0);
        if self.q != 0.0 {
            diffusion = format!("{diffusion} + {}*r^{}*(1+r^2)^(-{})", self.q, self.a, 1.5 * self.a);
        }
        format!("({diffusion})*(1+r^2)^(-{})", 0.5 * self.gamma)
    }

    pub fn problem(&self) -> Problem {
        let p = PotentialSpec::parse(&self.source_expression()).expect("generated source parses");
        Problem::new(self.dimension, self.gamma, self.a, p, PotentialSpec::constant(self.q))
    }

    /// Ball of radius `radius` with boundary value `u*(R)`, bracketed by
    /// `[εφ₁, v]`.
    pub fn ball_with_exact_data(
        &self,
        radius: f64,
        h: f64,
        quad_tol: f64,
        eigen_tol: f64,
    ) -> Result<BracketedBall, ExhaustionError> {
        let problem = self.problem();
        let phi = majorant(&problem)?;
        let k = compute_k(&phi, self.dimension, quad_tol)?;
        let grid = RadialGrid::with_spacing(radius, h)?;
        bracketed_ball(&problem, &phi, k.reduced, grid, self.exact(radius), eigen_tol)
    }

    pub fn max_error(&self, u: &RadialProfile) -> f64 {
        u.grid.nodes().zip(&u.values).map(|(r, x)| (x - self.exact(r)).abs()).fold(0.0, f64::max)
    }

    /// Solves at `h` and `h/2` and reports the observed order.
    pub fn convergence_study(
        &self,
        radius: f64,
        h: f64,
        newton_tol: f64,
        max_iter: usize,
    ) -> Result<ConvergenceStudy, ExhaustionError> {
        let spacings = vec![h, 0.5 * h];
        let mut max_errors = Vec::new();
        let mut reports = Vec::new();
        for &spacing in &spacings {
            let bracketed = self.ball_with_exact_data(radius, spacing, 1e-10, 1e-12)?;
            let (u, report) = solve_ball(&bracketed.ball, newton_tol, max_iter)
                .map_err(|source| ExhaustionError::Ball { radius, source })?;
            max_errors.push(self.max_error(&u));
            reports.push(report);
        }
        let observed_order = (max_errors[0] / max_errors[1]).log2();
        Ok(ConvergenceStudy { radius, spacings, max_errors, observed_order, reports })
    }
}
