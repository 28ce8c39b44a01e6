use super::{RadialError, RadialGrid, RadialProfile, Tridiagonal};

/// Second-order radial Laplacian `u'' + (N-1)/r u'`.
///
/// Interior nodes use central differences; the origin uses the symmetry
/// closure `2N(u₁ - u₀)/h²`, valid for profiles with `u'(0) = 0`. The entry
/// at `r = R` is not defined by the stencil and is set to 0.
pub fn discrete_laplacian(profile: &RadialProfile, dimension: usize) -> RadialProfile {
    let grid = profile.grid;
    let u = &profile.values;
    let mut out = vec![0.0; grid.len()];
    for (i, slot) in out.iter_mut().enumerate().take(grid.last()) {
        *slot = laplacian_at(grid, u, dimension, i);
    }
    RadialProfile { grid, values: out }
}

/// Stencil at a single node `0 <= i <= M`.
pub fn laplacian_at(grid: RadialGrid, u: &[f64], dimension: usize, i: usize) -> f64 {
    let h = grid.h();
    let h2 = h * h;
    if i == 0 {
        return 2.0 * dimension as f64 * (u[1] - u[0]) / h2;
    }
    let r = grid.node(i);
    (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2 + (dimension as f64 - 1.0) / r * (u[i + 1] - u[i - 1]) / (2.0 * h)
}

/// Matrix of `-Δₕ` on the unknowns `u₀..u_M` (the Dirichlet value at `R`
/// is eliminated).
pub fn negative_laplacian_matrix(grid: RadialGrid, dimension: usize) -> Tridiagonal {
    let n = grid.interior() + 1;
    let h = grid.h();
    let h2 = h * h;
    let nf = dimension as f64;
    let mut t = Tridiagonal::zeros(n);
    t.diag[0] = 2.0 * nf / h2;
    t.upper[0] = -2.0 * nf / h2;
    for i in 1..n {
        let r = grid.node(i);
        let drift = (nf - 1.0) / (2.0 * h * r);
        t.lower[i] = -(1.0 / h2 - drift);
        t.diag[i] = 2.0 / h2;
        t.upper[i] = -(1.0 / h2 + drift);
    }
    t
}

/// Central first difference at `0 <= i <= M` (zero at the origin).
pub fn central_gradient(grid: RadialGrid, u: &[f64], i: usize) -> f64 {
    if i == 0 {
        0.0
    } else {
        (u[i + 1] - u[i - 1]) / (2.0 * grid.h())
    }
}

pub(crate) fn check_len(profile: &RadialProfile) -> Result<(), RadialError> {
    if profile.values.len() != profile.grid.len() {
        return Err(RadialError::ShapeMismatch { expected: profile.grid.len(), got: profile.values.len() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_are_harmonic() {
        let g = RadialGrid::new(3.0, 50).unwrap();
        let lap = discrete_laplacian(&RadialProfile::from_fn(g, |_| 1.0), 3);
        assert!(lap.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn exact_on_even_quadratics() {
        for n in 3..=6 {
            let g = RadialGrid::new(2.0, 99).unwrap();
            let lap = discrete_laplacian(&RadialProfile::from_fn(g, |r| r * r), n);
            for i in 0..g.last() {
                assert!((lap.values[i] - 2.0 * n as f64).abs() < 1e-9, "n={n} i={i}");
            }
            assert_eq!(lap.values[g.last()], 0.0);
        }
    }

    #[test]
    fn second_order_on_smooth_profile() {
        // Δ(1+r²)^(-1/2) = -3(1+r²)^(-5/2) in three dimensions
        let err = |m: usize| {
            let g = RadialGrid::new(4.0, m).unwrap();
            let u = RadialProfile::from_fn(g, |r| (1.0 + r * r).powf(-0.5));
            let lap = discrete_laplacian(&u, 3);
            (0..g.last())
                .map(|i| {
                    let r = g.node(i);
                    (lap.values[i] + 3.0 * (1.0 + r * r).powf(-2.5)).abs()
                })
                .fold(0.0, f64::max)
        };
        let (coarse, fine) = (err(199), err(399));
        assert!(coarse < 5e-3);
        assert!(coarse / fine > 3.5, "ratio {}", coarse / fine);
    }

    #[test]
    fn matrix_matches_stencil() {
        let g = RadialGrid::new(1.0, 20).unwrap();
        let u: Vec<f64> = g.nodes().map(|r| (r * 3.0).cos() + 0.1 * r).collect();
        let a = negative_laplacian_matrix(g, 4);
        let mut au = a.mul(&u[..g.last()]);
        // eliminated boundary contribution
        au[g.interior()] += a.upper[g.interior()] * u[g.last()];
        for (i, v) in au.iter().enumerate() {
            assert!((v + laplacian_at(g, &u, 4, i)).abs() < 1e-8);
        }
    }
}
