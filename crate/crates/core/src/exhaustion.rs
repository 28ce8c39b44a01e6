//! Exhaustion of R^N by balls.
//!
//! Ball solutions increase with the radius and stay below the barrier `v`,
//! so they converge monotonically to the entire solution; since `v`
//! vanishes at infinity, so does the limit. Both orderings are checked
//! numerically at every stage.

use serde::Serialize;
use thiserror::Error;

use crate::ball::{solve_ball_from, BallError, BallProblem, SolveReport};
use crate::barrier::{compute_barrier, compute_k, BarrierData, BarrierError, KValues};
use crate::model::{majorant, validate_problem, MajorantError, MajorantProfile, Problem, ValidationReport};
use crate::radial::{choose_epsilon, first_eigenpair, RadialError, RadialGrid, RadialProfile};

/// Slack allowed in the nodewise ordering checks.
pub const ORDER_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustionConfig {
    /// Strictly increasing ball radii; the first one fixes the comparison
    /// window `[0, radii[0]]`.
    pub radii: Vec<f64>,
    pub h: f64,
    /// Sup-norm gap between successive solutions on the window.
    pub cauchy_tol: f64,
    /// Required bound on `v` at the last radius.
    pub tail_tol: f64,
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Tolerance of the improper integrals behind `K`.
    pub quad_tol: f64,
    pub eigen_tol: f64,
}

/// `R_k = r0·2^k` for `k < levels`.
pub fn geometric_radii(r0: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|k| r0 * 2f64.powi(k as i32)).collect()
}

impl Default for ExhaustionConfig {
    fn default() -> Self {
        ExhaustionConfig {
            radii: geometric_radii(5.0, 8),
            h: 0.01,
            cauchy_tol: 2e-3,
            tail_tol: 0.5,
            newton_tol: 1e-9,
            max_iter: 200,
            quad_tol: 1e-8,
            eigen_tol: 1e-12,
        }
    }
}

impl ExhaustionConfig {
    pub fn validate(&self) -> Result<(), ExhaustionError> {
        let bad = |msg: String| Err(ExhaustionError::InvalidConfig(msg));
        if self.radii.is_empty() {
            return bad("radius schedule is empty".into());
        }
        if self.radii[0] <= 0.0 || self.radii.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("radii must be positive and strictly increasing: {:?}", self.radii));
        }
        for (name, value) in [
            ("h", self.h),
            ("cauchy_tol", self.cauchy_tol),
            ("tail_tol", self.tail_tol),
            ("newton_tol", self.newton_tol),
            ("quad_tol", self.quad_tol),
            ("eigen_tol", self.eigen_tol),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return bad(format!("{name} must be positive, got {value}"));
            }
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderingCheck {
    /// `u_k <= u_{k+1}` on the comparison window.
    Domain,
    /// `u_k <= v` on the ball.
    Barrier,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExhaustionError {
    #[error("invalid exhaustion config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Validation(#[from] ValidationReport),
    #[error(transparent)]
    Majorant(#[from] MajorantError),
    #[error(transparent)]
    Barrier(#[from] BarrierError),
    #[error(transparent)]
    Radial(#[from] RadialError),
    #[error("ball solve on R = {radius} failed: {source}")]
    Ball { radius: f64, source: BallError },
    #[error("monotonicity violated ({check:?}) on R = {radius} at r = {r}: {lower} > {upper}")]
    Monotonicity { check: OrderingCheck, radius: f64, r: f64, lower: f64, upper: f64 },
}

/// Diagnostics of one ball in the schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub radius: f64,
    pub nodes: usize,
    pub lambda1: f64,
    pub epsilon: f64,
    /// `v(R)`.
    pub barrier_at_radius: f64,
    /// Sup-norm gap to the previous stage on the window.
    pub gap: Option<f64>,
    pub solve: SolveReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntireSolution {
    /// Solution on the last ball solved.
    pub profile: RadialProfile,
    /// Barrier on the same grid.
    pub barrier: RadialProfile,
    pub radii_used: Vec<f64>,
    pub successive_gaps: Vec<f64>,
    /// Each stage's solution restricted to the comparison window.
    pub window_profiles: Vec<RadialProfile>,
    /// `v` at the last radius; bounds `u` there.
    pub tail_value: f64,
    pub certified: bool,
    pub window_radius: f64,
    pub k: KValues,
    pub c: f64,
    pub stages: Vec<StageReport>,
    /// The last ball problem, kept for the uniqueness probe.
    pub final_ball: BallProblem,
}

fn first_violation(
    check: OrderingCheck,
    radius: f64,
    grid: RadialGrid,
    lower: &[f64],
    upper: &[f64],
) -> Result<(), ExhaustionError> {
    for i in 0..lower.len() {
        if lower[i] > upper[i] + ORDER_SLACK {
            return Err(ExhaustionError::Monotonicity {
                check,
                radius,
                r: grid.node(i),
                lower: lower[i],
                upper: upper[i],
            });
        }
    }
    Ok(())
}

/// A ball problem bracketed by `[εφ₁, v]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketedBall {
    pub ball: BallProblem,
    pub barrier: BarrierData,
    pub lambda1: f64,
    pub epsilon: f64,
}

/// Builds the barrier, eigenpair and subsolution scale on `grid`. `ε` is
/// halved further if needed so that `εφ₁ <= v`.
pub fn bracketed_ball(
    problem: &Problem,
    phi: &MajorantProfile,
    k: f64,
    grid: RadialGrid,
    boundary_value: f64,
    eigen_tol: f64,
) -> Result<BracketedBall, ExhaustionError> {
    let radius = grid.radius();
    let barrier = compute_barrier(phi, problem.dimension, problem.gamma, k, grid)?;
    let eig = first_eigenpair(grid, problem.dimension, eigen_tol)?;
    let mut epsilon = choose_epsilon(problem, &eig)?;
    while eig.phi1.values.iter().zip(&barrier.v.values).any(|(phi, v)| epsilon * phi > *v) {
        epsilon *= 0.5;
    }
    let low = RadialProfile { grid, values: eig.phi1.values.iter().map(|x| epsilon * x).collect() };
    let ball = BallProblem::new(problem, grid, boundary_value, low, barrier.v.clone())
        .map_err(|source| ExhaustionError::Ball { radius, source })?;
    Ok(BracketedBall { ball, barrier, lambda1: eig.lambda1, epsilon })
}

/// Solves on each radius of the schedule until the window gap falls below
/// `cauchy_tol` while `v(R) < tail_tol`.
///
/// Running out of radii is not an error: the result is returned with
/// `certified = false`.
pub fn solve_entire(problem: &Problem, config: &ExhaustionConfig) -> Result<EntireSolution, ExhaustionError> {
    config.validate()?;
    let problem = validate_problem(problem.clone())?;
    let phi = majorant(&problem)?;
    let k = compute_k(&phi, problem.dimension, config.quad_tol)?;
    let window = RadialGrid::with_spacing(config.radii[0], config.h)?;

    let mut stages = Vec::new();
    let mut gaps = Vec::new();
    let mut window_profiles = Vec::new();
    let mut previous: Option<RadialProfile> = None;
    let mut last = None;
    for &radius in &config.radii {
        let grid = RadialGrid::with_spacing(radius, config.h)?;
        let BracketedBall { ball: bp, barrier, lambda1, epsilon } =
            bracketed_ball(&problem, &phi, k.reduced, grid, 0.0, config.eigen_tol)?;
        let (u, solve) = solve_ball_from(&bp, &bp.high, config.newton_tol, config.max_iter)
            .map_err(|source| ExhaustionError::Ball { radius, source })?;

        first_violation(OrderingCheck::Barrier, radius, grid, &u.values, &barrier.v.values)?;
        let on_window = u.resample(window);
        let gap = match &previous {
            Some(prev) => {
                first_violation(OrderingCheck::Domain, radius, window, &prev.values, &on_window.values)?;
                let gap = prev.max_abs_diff(&on_window);
                gaps.push(gap);
                Some(gap)
            }
            None => None,
        };
        let tail_value = barrier.v.values[grid.last()];
        stages.push(StageReport {
            radius,
            nodes: grid.len(),
            lambda1,
            epsilon,
            barrier_at_radius: tail_value,
            gap,
            solve,
        });
        window_profiles.push(on_window.clone());
        previous = Some(on_window);
        let done = matches!(gap, Some(g) if g < config.cauchy_tol) && tail_value < config.tail_tol;
        last = Some((u, barrier, bp, tail_value, done));
        if done {
            break;
        }
    }
    let (profile, barrier, final_ball, tail_value, certified) = last.expect("schedule is non-empty");
    Ok(EntireSolution {
        profile,
        c: barrier.c,
        barrier: barrier.v,
        radii_used: stages.iter().map(|s| s.radius).collect(),
        successive_gaps: gaps,
        window_profiles,
        tail_value,
        certified,
        window_radius: config.radii[0],
        k,
        stages,
        final_ball,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeStatus {
    Passed,
    Failed,
    NotApplicable,
}

/// Agreement of two Newton runs on the final ball from different starts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub status: ProbeStatus,
    pub radius: f64,
    /// Sup-norm difference of the two converged profiles.
    pub max_difference: Option<f64>,
    pub threshold: f64,
    pub from_supersolution: Option<SolveReport>,
    pub from_midpoint: Option<SolveReport>,
}

/// Solves `bp` from two initial iterates and returns the sup-norm
/// difference of the results.
pub fn probe_ball(
    bp: &BallProblem,
    first: &RadialProfile,
    second: &RadialProfile,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, SolveReport, SolveReport), BallError> {
    let (u1, r1) = solve_ball_from(bp, first, tol, max_iter)?;
    let (u2, r2) = solve_ball_from(bp, second, tol, max_iter)?;
    Ok((u1.max_abs_diff(&u2), r1, r2))
}

/// Re-solves the final ball of a certified run from `v` and from the
/// bracket midpoint; passes when they agree within `10·newton_tol`.
pub fn probe_solution(solution: &EntireSolution, config: &ExhaustionConfig) -> Result<ProbeReport, ExhaustionError> {
    let bp = &solution.final_ball;
    let radius = bp.grid.radius();
    let threshold = 10.0 * config.newton_tol;
    if !solution.certified {
        return Ok(ProbeReport {
            status: ProbeStatus::NotApplicable,
            radius,
            max_difference: None,
            threshold,
            from_supersolution: None,
            from_midpoint: None,
        });
    }
    let midpoint = RadialProfile {
        grid: bp.grid,
        values: bp.low.values.iter().zip(&bp.high.values).map(|(l, h)| 0.5 * (l + h)).collect(),
    };
    let (diff, r1, r2) = probe_ball(bp, &bp.high, &midpoint, config.newton_tol, config.max_iter)
        .map_err(|source| ExhaustionError::Ball { radius, source })?;
    Ok(ProbeReport {
        status: if diff < threshold { ProbeStatus::Passed } else { ProbeStatus::Failed },
        radius,
        max_difference: Some(diff),
        threshold,
        from_supersolution: Some(r1),
        from_midpoint: Some(r2),
    })
}

pub fn uniqueness_probe(problem: &Problem, config: &ExhaustionConfig) -> Result<ProbeReport, ExhaustionError> {
    let solution = solve_entire(problem, config)?;
    probe_solution(&solution, config)
}
