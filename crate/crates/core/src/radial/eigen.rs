use super::laplacian::{central_gradient, negative_laplacian_matrix};
use super::{RadialError, RadialGrid, RadialProfile};
use crate::model::Problem;

/// Default cap on inverse-iteration sweeps.
pub const EIGEN_MAX_ITER: usize = 10_000;

/// First Dirichlet eigenpair of `-Δ` on the ball.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda1: f64,
    /// Positive eigenfunction, max-normalized to 1, zero at `r = R`.
    pub phi1: RadialProfile,
    pub iterations: usize,
}

/// Inverse power iteration on the tridiagonal `-Δₕ`.
///
/// Stops when two successive eigenvalue estimates differ by less than
/// `tol` relative to the current estimate.
pub fn first_eigenpair(grid: RadialGrid, dimension: usize, tol: f64) -> Result<EigenPair, RadialError> {
    first_eigenpair_capped(grid, dimension, tol, EIGEN_MAX_ITER)
}

pub fn first_eigenpair_capped(
    grid: RadialGrid,
    dimension: usize,
    tol: f64,
    max_iter: usize,
) -> Result<EigenPair, RadialError> {
    let op = negative_laplacian_matrix(grid, dimension);
    let n = op.len();
    let mut x = vec![1.0; n];
    let mut lambda = f64::NAN;
    for it in 1..=max_iter {
        let y = op.solve(&x)?;
        let xx: f64 = x.iter().map(|v| v * v).sum();
        let xy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let next = xx / xy;
        let scale = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(scale > 0.0) {
            return Err(RadialError::EigenNonconvergence { iterations: it });
        }
        x = y.into_iter().map(|v| v / scale).collect();
        let done = (next - lambda).abs() < tol * next.abs();
        lambda = next;
        if done {
            return finish(grid, lambda, x, it);
        }
    }
    Err(RadialError::EigenNonconvergence { iterations: max_iter })
}

fn finish(grid: RadialGrid, lambda1: f64, mut x: Vec<f64>, iterations: usize) -> Result<EigenPair, RadialError> {
    if let Some(i) = x.iter().position(|&v| !(v > 0.0)) {
        return Err(RadialError::NonpositiveEigenfunction { index: i });
    }
    let peak = x.iter().cloned().fold(0.0, f64::max);
    x.iter_mut().for_each(|v| *v /= peak);
    x.push(0.0);
    Ok(EigenPair { lambda1, phi1: RadialProfile { grid, values: x }, iterations })
}

/// Smallest admissible subsolution scale.
pub const EPSILON_FLOOR: f64 = 1e-300;
const EPSILON_REFINEMENTS: usize = 60;

/// Largest (to bisection resolution) `ε ≤ 1` such that `εφ₁` satisfies
///
/// `ε λ₁ φ₁ + q ε^a |φ₁'|^a ≤ p ε^(-γ) φ₁^(-γ)`
///
/// at every node `0 <= i <= M`. Halves from `ε = 1` until satisfied, then
/// bisects between the last failing and first passing value.
pub fn choose_epsilon(problem: &Problem, eig: &EigenPair) -> Result<f64, RadialError> {
    let grid = eig.phi1.grid;
    let rs: Vec<f64> = grid.nodes().take(grid.last()).collect();
    let p = problem.p.sample(rs.iter().copied())?;
    let q = problem.q.sample(rs.iter().copied())?;
    let phi = &eig.phi1.values;
    let slope: Vec<f64> = (0..grid.last()).map(|i| central_gradient(grid, phi, i).abs()).collect();
    let admissible = |eps: f64| {
        (0..grid.last()).all(|i| {
            let lhs = eps * eig.lambda1 * phi[i] + q[i] * (eps * slope[i]).powf(problem.a);
            lhs <= p[i] * (eps * phi[i]).powf(-problem.gamma)
        })
    };
    let mut eps = 1.0;
    if admissible(eps) {
        return Ok(eps);
    }
    while !admissible(eps) {
        eps *= 0.5;
        if eps < EPSILON_FLOOR {
            return Err(RadialError::EpsilonUnderflow);
        }
    }
    let (mut pass, mut fail) = (eps, 2.0 * eps);
    for _ in 0..EPSILON_REFINEMENTS {
        let mid = 0.5 * (pass + fail);
        if mid <= pass || mid >= fail {
            break;
        }
        if admissible(mid) {
            pass = mid;
        } else {
            fail = mid;
        }
    }
    assert!(admissible(pass), "bisection returned an inadmissible epsilon");
    Ok(pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialSpec;
    use std::f64::consts::PI;

    #[test]
    fn unit_eigenvalue_on_ball_of_radius_pi() {
        let g = RadialGrid::new(PI, 999).unwrap();
        let eig = first_eigenpair(g, 3, 1e-13).unwrap();
        assert!((eig.lambda1 - 1.0).abs() < 1e-5, "{}", eig.lambda1);
        // φ₁ ∝ sin(r)/r
        for i in (0..g.len()).step_by(50) {
            let r = g.node(i);
            let exact = if r == 0.0 { 1.0 } else { r.sin() / r };
            assert!((eig.phi1.values[i] - exact).abs() < 1e-5);
        }
        assert_eq!(eig.phi1.values[g.last()], 0.0);
    }

    #[test]
    fn unit_ball_and_scaling() {
        let g = RadialGrid::new(1.0, 999).unwrap();
        let small = first_eigenpair(g, 3, 1e-13).unwrap().lambda1;
        assert!((small - PI * PI).abs() < 1e-3);
        let big = first_eigenpair(RadialGrid::new(2.0, 999).unwrap(), 3, 1e-13).unwrap().lambda1;
        assert!((big - small / 4.0).abs() < 1e-3 * small);
    }

    #[test]
    fn higher_dimensions_use_bessel_zeros() {
        // j_{1,1} = 3.8317059702 for N=4, j_{3/2,1} = 4.4934094579 for N=5
        for (n, zero) in [(4, 3.831_705_970_207_512), (5, 4.493_409_457_909_064)] {
            let g = RadialGrid::new(1.0, 999).unwrap();
            let lam = first_eigenpair(g, n, 1e-13).unwrap().lambda1;
            assert!((lam - zero * zero).abs() < 1e-3 * zero * zero, "N={n}: {lam}");
        }
    }

    #[test]
    fn eigenfunction_positive_and_normalized() {
        let g = RadialGrid::new(7.5, 300).unwrap();
        let eig = first_eigenpair(g, 5, 1e-12).unwrap();
        assert!(eig.phi1.values[..g.last()].iter().all(|&v| v > 0.0));
        let peak = eig.phi1.values.iter().cloned().fold(0.0, f64::max);
        assert_eq!(peak, 1.0);
    }

    #[test]
    fn iteration_cap_is_an_error() {
        let g = RadialGrid::new(1.0, 200).unwrap();
        assert!(matches!(
            first_eigenpair_capped(g, 3, 1e-15, 2),
            Err(RadialError::EigenNonconvergence { iterations: 2 })
        ));
    }

    fn problem(p: &str, q: &str, gamma: f64, a: f64) -> Problem {
        Problem::new(3, gamma, a, PotentialSpec::parse(p).unwrap(), PotentialSpec::parse(q).unwrap())
    }

    fn satisfied(problem: &Problem, eig: &EigenPair, eps: f64) -> bool {
        let g = eig.phi1.grid;
        (0..g.last()).all(|i| {
            let r = g.node(i);
            let phi = eig.phi1.values[i];
            let d = central_gradient(g, &eig.phi1.values, i).abs();
            let lhs = eps * eig.lambda1 * phi + problem.q.eval(r).unwrap() * (eps * d).powf(problem.a);
            lhs <= problem.p.eval(r).unwrap() * (eps * phi).powf(-problem.gamma)
        })
    }

    #[test]
    fn epsilon_for_unit_source() {
        let g = RadialGrid::new(PI, 999).unwrap();
        let eig = first_eigenpair(g, 3, 1e-13).unwrap();
        let pr = problem("1", "0", 1.0, 2.0);
        // ε²λ₁φ₁² <= 1 holds for ε = 0.9
        assert!(satisfied(&pr, &eig, 0.9));
        let eps = choose_epsilon(&pr, &eig).unwrap();
        assert!(eps >= 0.9);
        assert!(satisfied(&pr, &eig, eps));
    }

    #[test]
    fn epsilon_is_sound_and_monotone_in_p() {
        let g = RadialGrid::new(10.0, 999).unwrap();
        let eig = first_eigenpair(g, 3, 1e-12).unwrap();
        let base = problem("1e-3*(1+r^2)^(-2)", "5", 1.0, 0.5);
        let scaled = problem("10*(1+r^2)^(-2)", "5", 1.0, 0.5);
        let e0 = choose_epsilon(&base, &eig).unwrap();
        let e1 = choose_epsilon(&scaled, &eig).unwrap();
        assert!(e0 < 1.0);
        assert!(satisfied(&base, &eig, e0));
        assert!(!satisfied(&base, &eig, e0 * (1.0 + 1e-9)));
        assert!(satisfied(&scaled, &eig, e1));
        assert!(e1 >= e0);
    }

    #[test]
    fn vanishing_source_underflows() {
        let g = RadialGrid::new(2.0, 99).unwrap();
        let eig = first_eigenpair(g, 3, 1e-12).unwrap();
        let pr = problem("0*r", "0", 1.0, 1.0);
        assert_eq!(choose_epsilon(&pr, &eig), Err(RadialError::EpsilonUnderflow));
    }
}
