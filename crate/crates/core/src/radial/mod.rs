//! Radial finite differences on balls: grids, the radial Laplacian with
//! the symmetry closure at the origin, the first Dirichlet eigenpair, and
//! the subsolution scale `ε`.

mod eigen;
mod grid;
mod laplacian;
mod tridiagonal;

use thiserror::Error;

pub use eigen::{choose_epsilon, first_eigenpair, first_eigenpair_capped, EigenPair, EIGEN_MAX_ITER, EPSILON_FLOOR};
pub use grid::{RadialGrid, RadialProfile, MIN_INTERIOR_NODES};
pub(crate) use laplacian::check_len;
pub use laplacian::{central_gradient, discrete_laplacian, laplacian_at, negative_laplacian_matrix};
pub use tridiagonal::Tridiagonal;

use crate::potential::PotentialError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RadialError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("profile has {got} values, grid has {expected} nodes")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("tridiagonal system is singular at row {row}")]
    SingularSystem { row: usize },
    #[error("inverse iteration did not converge after {iterations} iterations")]
    EigenNonconvergence { iterations: usize },
    #[error("eigenfunction is not positive at node {index}")]
    NonpositiveEigenfunction { index: usize },
    #[error("no admissible subsolution scale above {EPSILON_FLOOR:e}")]
    EpsilonUnderflow,
    #[error(transparent)]
    Potential(#[from] PotentialError),
}
