//! Dirichlet problem on a ball,
//!
//! ```text
//! -Δu + q|u'|^a = p u^(-γ)  in B_R,   u'(0) = 0,   u(R) = g,
//! ```
//!
//! solved by damped Newton iteration with every iterate projected into the
//! order interval `[εφ₁, v]`.

use serde::Serialize;
use thiserror::Error;

use crate::model::Problem;
use crate::potential::PotentialError;
use crate::radial::{
    central_gradient, check_len, laplacian_at, negative_laplacian_matrix, RadialError, RadialGrid, RadialProfile,
};

/// Regularization `ε_g` in `|s|^a ≈ (s² + ε_g²)^(a/2)`.
pub const GRADIENT_REGULARIZATION: f64 = 1e-12;
/// Sufficient-decrease constant of the backtracking line search.
pub const ARMIJO: f64 = 1e-4;
/// Smallest step length tried before the line search gives up.
pub const MIN_STEP: f64 = 1.0 / (1u64 << 40) as f64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BallError {
    #[error("iterate is not positive at node {index} (r = {r}): u = {value}")]
    NonpositiveIterate { index: usize, r: f64, value: f64 },
    #[error("bracket collapsed at node {index} (r = {r}): low {low} > high {high}")]
    BracketCollapse { index: usize, r: f64, low: f64, high: f64 },
    #[error("subsolution is not positive at interior node {index}")]
    NonpositiveSubsolution { index: usize },
    #[error("Newton did not reach the tolerance in {} iterations (residual {:e})", .0.iterations, .0.final_residual)]
    MaxIterExceeded(Box<SolveReport>),
    #[error("line search stalled after {} iterations (residual {:e})", .0.iterations, .0.final_residual)]
    LineSearchStalled(Box<SolveReport>),
    #[error(transparent)]
    Radial(#[from] RadialError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

/// A ball problem with its sub/supersolution bracket and sampled
/// coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct BallProblem {
    pub dimension: usize,
    pub gamma: f64,
    pub a: f64,
    pub grid: RadialGrid,
    /// Dirichlet value at `r = R`.
    pub boundary_value: f64,
    pub low: RadialProfile,
    pub high: RadialProfile,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub gradient_regularization: f64,
}

impl BallProblem {
    pub fn new(
        problem: &Problem,
        grid: RadialGrid,
        boundary_value: f64,
        low: RadialProfile,
        high: RadialProfile,
    ) -> Result<BallProblem, BallError> {
        check_len(&low)?;
        check_len(&high)?;
        if low.grid != grid || high.grid != grid {
            return Err(RadialError::InvalidGrid("bracket profiles live on another grid".into()).into());
        }
        for i in 0..grid.len() {
            if low.values[i] > high.values[i] {
                return Err(BallError::BracketCollapse {
                    index: i,
                    r: grid.node(i),
                    low: low.values[i],
                    high: high.values[i],
                });
            }
            if i < grid.last() && !(low.values[i] > 0.0) {
                return Err(BallError::NonpositiveSubsolution { index: i });
            }
        }
        Ok(BallProblem {
            dimension: problem.dimension,
            gamma: problem.gamma,
            a: problem.a,
            grid,
            boundary_value,
            low,
            high,
            p: problem.p.sample(grid.nodes())?,
            q: problem.q.sample(grid.nodes())?,
            gradient_regularization: GRADIENT_REGULARIZATION,
        })
    }

    fn clamp(&self, u: &mut [f64]) -> usize {
        let mut clamped = 0;
        for i in 0..self.grid.last() {
            let (lo, hi) = (self.low.values[i], self.high.values[i]);
            if u[i] < lo {
                u[i] = lo;
                clamped += 1;
            } else if u[i] > hi {
                u[i] = hi;
                clamped += 1;
            }
        }
        u[self.grid.last()] = self.boundary_value;
        clamped
    }

    fn regularized_power(&self, s: f64) -> f64 {
        (s * s + self.gradient_regularization.powi(2)).powf(0.5 * self.a)
    }

    fn regularized_power_slope(&self, s: f64) -> f64 {
        self.a * s * (s * s + self.gradient_regularization.powi(2)).powf(0.5 * self.a - 1.0)
    }

    fn residual_values(&self, u: &[f64]) -> Result<Vec<f64>, BallError> {
        let grid = self.grid;
        let last = grid.last();
        let mut f = vec![0.0; grid.len()];
        for i in 0..last {
            if !(u[i] > 0.0) {
                return Err(BallError::NonpositiveIterate { index: i, r: grid.node(i), value: u[i] });
            }
            let gradient = central_gradient(grid, u, i);
            f[i] = -laplacian_at(grid, u, self.dimension, i) + self.q[i] * self.regularized_power(gradient)
                - self.p[i] * u[i].powf(-self.gamma);
        }
        f[last] = u[last] - self.boundary_value;
        Ok(f)
    }
}

/// `F(u)` at every node: the discrete equation at `0..=M` and
/// `u(R) - g` at the boundary node.
pub fn nonlinear_residual(u: &RadialProfile, bp: &BallProblem) -> Result<RadialProfile, BallError> {
    check_len(u)?;
    Ok(RadialProfile { grid: bp.grid, values: bp.residual_values(&u.values)? })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Max-norm residual before the first and after every Newton step.
    pub residual_history: Vec<f64>,
    pub final_residual: f64,
    /// Node projections into the bracket, summed over accepted steps.
    pub bracket_projections: usize,
    /// Accepted steps shorter than the full Newton step.
    pub damping_events: usize,
    pub gradient_regularization: f64,
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn two_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves from the supersolution.
pub fn solve_ball(bp: &BallProblem, tol: f64, max_iter: usize) -> Result<(RadialProfile, SolveReport), BallError> {
    solve_ball_from(bp, &bp.high, tol, max_iter)
}

/// Damped Newton from `init` (projected into the bracket first).
///
/// Each step solves the tridiagonal Newton system, then halves the step
/// until `‖F(u + tδ)‖₂ <= (1 - 1e-4·t)‖F(u)‖₂`, projecting each trial
/// into the bracket. Stops once `‖F‖∞ < tol`.
pub fn solve_ball_from(
    bp: &BallProblem,
    init: &RadialProfile,
    tol: f64,
    max_iter: usize,
) -> Result<(RadialProfile, SolveReport), BallError> {
    check_len(init)?;
    let grid = bp.grid;
    let last = grid.last();
    let h = grid.h();
    let laplacian = negative_laplacian_matrix(grid, bp.dimension);

    let mut u = init.values.clone();
    let mut projections = bp.clamp(&mut u);
    let mut f = bp.residual_values(&u)?;
    let mut report = SolveReport {
        iterations: 0,
        residual_history: vec![max_norm(&f)],
        final_residual: max_norm(&f),
        bracket_projections: 0,
        damping_events: 0,
        gradient_regularization: bp.gradient_regularization,
    };

    while report.final_residual >= tol {
        if report.iterations >= max_iter {
            report.bracket_projections = projections;
            return Err(BallError::MaxIterExceeded(Box::new(report)));
        }
        let mut jac = laplacian.clone();
        for i in 0..last {
            jac.diag[i] += bp.gamma * bp.p[i] * u[i].powf(-bp.gamma - 1.0);
            if i > 0 && bp.q[i] != 0.0 {
                let slope = bp.q[i] * bp.regularized_power_slope(central_gradient(grid, &u, i)) / (2.0 * h);
                jac.lower[i] -= slope;
                jac.upper[i] += slope;
            }
        }
        let rhs: Vec<f64> = f[..last].iter().map(|x| -x).collect();
        let step = jac.solve(&rhs)?;

        let norm = two_norm(&f);
        let mut t = 1.0;
        let accepted = loop {
            let mut trial = u.clone();
            for i in 0..last {
                trial[i] += t * step[i];
            }
            let clamped = bp.clamp(&mut trial);
            let f_trial = bp.residual_values(&trial)?;
            if two_norm(&f_trial) <= (1.0 - ARMIJO * t) * norm {
                break Some((trial, f_trial, clamped));
            }
            t *= 0.5;
            if t < MIN_STEP {
                break None;
            }
        };
        let Some((trial, f_trial, clamped)) = accepted else {
            report.bracket_projections = projections;
            return Err(BallError::LineSearchStalled(Box::new(report)));
        };
        if t < 1.0 {
            report.damping_events += 1;
        }
        projections += clamped;
        u = trial;
        f = f_trial;
        report.iterations += 1;
        report.final_residual = max_norm(&f);
        report.residual_history.push(report.final_residual);
    }
    report.bracket_projections = projections;
    debug_assert!((0..last).all(|i| bp.low.values[i] <= u[i] && u[i] <= bp.high.values[i]));
    Ok((RadialProfile { grid, values: u }, report))
}
