//! Positive entire solutions of `-Δu + q(x)|∇u|^a = p(x)u^(-γ)` on R^N
//! (N >= 3) decaying at infinity.
//!
//! The solver follows the classical existence argument step by step:
//!
//! * [`barrier`] builds the explicit radial supersolution `v` from the
//!   majorant `Φ` of `p` and checks that `∫₀^∞ rΦ(r) dr` converges;
//! * [`radial`] discretizes balls and provides the eigenfunction
//!   subsolution `εφ₁`;
//! * [`ball`] solves the Dirichlet problem on a ball with a damped Newton
//!   method confined to `[εφ₁, v]`;
//! * [`exhaustion`] solves on a growing sequence of balls, checks that
//!   the solutions increase and stay below `v`, and probes uniqueness.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod ball;
pub mod barrier;
pub mod cli;
pub mod exhaustion;
pub mod expr;
pub mod io;
pub mod manufactured;
pub mod model;
pub mod potential;
pub mod quadrature;
pub mod radial;

pub use ball::{nonlinear_residual, solve_ball, solve_ball_from, BallError, BallProblem, SolveReport};
pub use barrier::{
    check_integrability, compute_barrier, compute_k, verify_supersolution, BarrierData, BarrierError, Classification,
    IntegrabilityVerdict, KValues, SupersolutionReport,
};
pub use exhaustion::{solve_entire, uniqueness_probe, EntireSolution, ExhaustionConfig, ExhaustionError, ProbeReport};
pub use model::{majorant, validate_problem, MajorantProfile, Problem, Provenance, ValidationReport};
pub use potential::PotentialSpec;
pub use radial::{choose_epsilon, discrete_laplacian, first_eigenpair, EigenPair, RadialGrid, RadialProfile};
