//! The explicit supersolution.
//!
//! With `Φ` the radial majorant of `p`,
//!
//! ```text
//! K    = ∫₀^∞ ζ^(1-N) ∫₀^ζ σ^(N-1) Φ(σ) dσ dζ = (N-2)^(-1) ∫₀^∞ rΦ(r) dr
//! w(r) = K - ∫₀^r ζ^(1-N) ∫₀^ζ σ^(N-1) Φ(σ) dσ dζ        (-Δw = Φ, w → 0)
//! c    = [K(2+γ)]^(1/(1+γ))
//! v(r) = [c(2+γ) w(r)]^(1/(2+γ))
//! ```
//!
//! `v` is decreasing, bounded by `c = v(0)`, and satisfies
//! `Δv + Φ v^(-γ) < 0`, so it dominates every ball solution.

use serde::Serialize;
use thiserror::Error;

use crate::model::MajorantProfile;
use crate::potential::PotentialError;
use crate::quadrature::{adaptive_simpson, gauss20, integrate_to_infinity, TailRule, TailStatus};
use crate::radial::{laplacian_at, RadialGrid, RadialProfile};

/// Multiplier applied to the truncation-error estimate when judging the
/// discrete supersolution inequality.
pub const DEFAULT_SLACK_FACTOR: f64 = 2.0;

/// Allowed distance of `v(0)` from `c`, and of `max v` above `c`.
pub const V_ULP_BOUND: u64 = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BarrierError {
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("∫ rΦ(r) dr is {0:?}; the barrier construction does not apply")]
    NotConvergent(Classification),
    #[error("K cross-check failed: nested quadrature gives {double}, reduced form gives {reduced}")]
    CrossCheck { double: f64, reduced: f64 },
    #[error("nested quadrature for K did not settle (last relative change {change:e})")]
    NestedNotConvergent { change: f64 },
    #[error("barrier invariant violated: {0}")]
    Invariant(String),
    #[error("supersolution inequality fails at r = {r} (node {index}): margin {margin:e}")]
    SupersolutionViolation { index: usize, r: f64, margin: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Convergent,
    Divergent,
    Indeterminate,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Convergent => "convergent",
            Classification::Divergent => "divergent",
            Classification::Indeterminate => "indeterminate",
        })
    }
}

/// Outcome of the decay test on `∫₀^∞ rΦ(r) dr`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrabilityVerdict {
    pub classification: Classification,
    /// Tail-extrapolated value of the integral (the last partial when not
    /// convergent).
    pub value_estimate: f64,
    /// Largest truncation radius integrated.
    pub tail_bound_used: f64,
    /// Last relative change of the extrapolated partial integrals.
    pub error_estimate: f64,
    /// `∫₀^T rΦ` for `T = 1, 2, 4, …`.
    pub partials: Vec<f64>,
}

fn segment_tol(tol: f64) -> f64 {
    (tol * 1e-3).max(1e-15)
}

/// Doubling-radius Simpson quadrature of `∫₀^∞ rΦ(r) dr`.
pub fn check_integrability(phi: &MajorantProfile, tol: f64) -> Result<IntegrabilityVerdict, BarrierError> {
    let seg_tol = segment_tol(tol);
    let tail = integrate_to_infinity(
        |a, b| adaptive_simpson(&mut |r: f64| Ok::<_, PotentialError>(r * phi.eval(r)?), a, b, seg_tol),
        TailRule::new(tol),
    )?;
    let classification = match tail.status {
        TailStatus::Converged => Classification::Convergent,
        TailStatus::Diverged => Classification::Divergent,
        TailStatus::Indeterminate => Classification::Indeterminate,
    };
    let value_estimate = match classification {
        Classification::Convergent => tail.value,
        _ => *tail.partials.last().unwrap(),
    };
    Ok(IntegrabilityVerdict {
        classification,
        value_estimate,
        tail_bound_used: tail.radius,
        error_estimate: tail.relative_change,
        partials: tail.partials,
    })
}

/// `K` by both routes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KValues {
    /// Direct nested quadrature of the double integral.
    pub double: f64,
    /// `(N-2)^(-1) ∫₀^∞ rΦ(r) dr`.
    pub reduced: f64,
    pub verdict: IntegrabilityVerdict,
}

impl KValues {
    pub fn relative_gap(&self) -> f64 {
        (self.double - self.reduced).abs() / self.reduced.abs()
    }
}

/// Computes `K` as a nested improper integral and through the
/// integration-by-parts reduction, and requires
/// `|K_double - K_reduced| <= 10·tol·(1 + K_reduced)`.
pub fn compute_k(phi: &MajorantProfile, dimension: usize, tol: f64) -> Result<KValues, BarrierError> {
    let verdict = check_integrability(phi, tol)?;
    if verdict.classification != Classification::Convergent {
        return Err(BarrierError::NotConvergent(verdict.classification));
    }
    let reduced = verdict.value_estimate / (dimension as f64 - 2.0);
    let double = nested_k(phi, dimension, tol)?;
    if (double - reduced).abs() > 10.0 * tol * (1.0 + reduced) {
        return Err(BarrierError::CrossCheck { double, reduced });
    }
    Ok(KValues { double, reduced, verdict })
}

/// Nested quadrature of the double integral. The partial up to `T` adds
/// `I(T)·T^(2-N)/(N-2)`, the exact outer integral of the inner mass
/// `I(T) = ∫₀^T σ^(N-1)Φ` over `(T, ∞)`, so each partial is the double
/// integral of `Φ·1[0,T]`.
fn nested_k(phi: &MajorantProfile, dimension: usize, tol: f64) -> Result<f64, BarrierError> {
    let n = dimension as i32;
    let frozen_tail = |mass: f64, t: f64| if t == 0.0 { 0.0 } else { mass * t.powi(2 - n) / (n - 2) as f64 };
    let mut inner = |s: f64| Ok::<_, PotentialError>(s.powi(n - 1) * phi.eval(s)?);
    // ∫₀^a σ^(N-1)Φ for the left end `a` of the current segment
    let mut inner_at_start = 0.0;
    let seg_tol = segment_tol(tol);
    let tail = integrate_to_infinity(
        |a, b| -> Result<f64, PotentialError> {
            let base = inner_at_start;
            let mut outer = |z: f64| -> Result<f64, PotentialError> {
                if z == 0.0 {
                    return Ok(0.0);
                }
                let partial = base + gauss20().integrate(&mut inner, a, z)?;
                Ok(z.powi(1 - n) * partial)
            };
            let value = adaptive_simpson(&mut outer, a, b, seg_tol)?;
            let inner_at_end = base + gauss20().integrate(&mut inner, a, b)?;
            inner_at_start = inner_at_end;
            Ok(value + frozen_tail(inner_at_end, b) - frozen_tail(base, a))
        },
        TailRule::new(tol),
    )?;
    if tail.status != TailStatus::Converged {
        return Err(BarrierError::NestedNotConvergent { change: tail.relative_change });
    }
    Ok(tail.value)
}

/// `K`, `c` and the sampled `w`, `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierData {
    pub k: f64,
    pub c: f64,
    pub gamma: f64,
    pub dimension: usize,
    pub w: RadialProfile,
    pub v: RadialProfile,
}

impl BarrierData {
    pub fn grid(&self) -> RadialGrid {
        self.v.grid
    }
}

/// `c = [K(2+γ)]^(1/(1+γ))`.
pub fn barrier_constant(k: f64, gamma: f64) -> f64 {
    (k * (2.0 + gamma)).powf(1.0 / (1.0 + gamma))
}

fn ulps_between(a: f64, b: f64) -> u64 {
    debug_assert!(a >= 0.0 && b >= 0.0);
    a.to_bits().abs_diff(b.to_bits())
}

/// Samples `w` by cumulative Simpson quadrature of the nested integral
/// (inner integrals at the half and quarter points of every cell), then
/// `v` by its closed form, and checks the barrier invariants.
pub fn compute_barrier(
    phi: &MajorantProfile,
    dimension: usize,
    gamma: f64,
    k: f64,
    grid: RadialGrid,
) -> Result<BarrierData, BarrierError> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(BarrierError::Invariant(format!("K must be positive and finite, got {k}")));
    }
    let n = dimension as i32;
    let radial_mass = |s: f64| -> Result<f64, PotentialError> { Ok(s.powi(n - 1) * phi.eval(s)?) };
    let outer = |z: f64, inner: f64| if z == 0.0 { 0.0 } else { z.powi(1 - n) * inner };

    let mut w = Vec::with_capacity(grid.len());
    w.push(k);
    let (mut inner, mut outer_sum) = (0.0, 0.0);
    let mut f_left = radial_mass(0.0)?;
    for i in 0..grid.last() {
        let (a, b) = (grid.node(i), grid.node(i + 1));
        let m = 0.5 * (a + b);
        let f_quarter = radial_mass(0.5 * (a + m))?;
        let f_mid = radial_mass(m)?;
        let f_right = radial_mass(b)?;
        let inner_mid = inner + (m - a) / 6.0 * (f_left + 4.0 * f_quarter + f_mid);
        let inner_right = inner + (b - a) / 6.0 * (f_left + 4.0 * f_mid + f_right);
        outer_sum += (b - a) / 6.0 * (outer(a, inner) + 4.0 * outer(m, inner_mid) + outer(b, inner_right));
        inner = inner_right;
        f_left = f_right;
        w.push(k - outer_sum);
    }
    if let Some(i) = w.iter().position(|&x| x < 0.0) {
        return Err(BarrierError::Invariant(format!(
            "w({}) = {:e} < 0; K is too small for this grid",
            grid.node(i),
            w[i]
        )));
    }
    let c = barrier_constant(k, gamma);
    let exponent = 1.0 / (2.0 + gamma);
    let scale = c * (2.0 + gamma);
    let v: Vec<f64> = w.iter().map(|&wi| (scale * wi).powf(exponent)).collect();

    if ulps_between(v[0], c) > V_ULP_BOUND {
        return Err(BarrierError::Invariant(format!("v(0) = {} differs from c = {c}", v[0])));
    }
    for i in 1..v.len() {
        if w[i] > w[i - 1] {
            return Err(BarrierError::Invariant(format!("w increases at r = {}", grid.node(i))));
        }
        if v[i] > v[i - 1] && ulps_between(v[i], v[i - 1]) > 1 {
            return Err(BarrierError::Invariant(format!("v increases at r = {}", grid.node(i))));
        }
        if v[i] > c && ulps_between(v[i], c) > V_ULP_BOUND {
            return Err(BarrierError::Invariant(format!("v exceeds c at r = {}", grid.node(i))));
        }
    }
    Ok(BarrierData {
        k,
        c,
        gamma,
        dimension,
        w: RadialProfile { grid, values: w },
        v: RadialProfile { grid, values: v },
    })
}

/// Nodewise margins of the discrete inequality `Δₕv + Φ v^(-γ) < 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupersolutionReport {
    /// `Δₕv + Φ v^(-γ)` at nodes `0..=M` (0 at `r = R`).
    pub raw: Vec<f64>,
    /// Truncation-error allowance at each node.
    pub slack: Vec<f64>,
    /// `raw - slack`; the inequality is verified where this is negative.
    pub margin: Vec<f64>,
    pub worst_index: usize,
    pub worst_margin: f64,
    /// Nodes where the raw value is not negative (inside the allowance).
    pub raw_nonnegative: usize,
}

impl SupersolutionReport {
    pub fn passed(&self) -> bool {
        self.worst_margin < 0.0
    }
}

/// Third and fourth central differences at node `j`, with the even
/// reflection `v(-r) = v(r)` across the origin. Needs `j + 2 <= M + 1`.
fn high_differences(v: &[f64], h: f64, j: usize) -> (f64, f64) {
    let at = |k: isize| v[k.unsigned_abs()];
    let j = j as isize;
    let (m2, m1, z, p1, p2) = (at(j - 2), at(j - 1), at(j), at(j + 1), at(j + 2));
    let d3 = (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h * h * h);
    let d4 = (p2 - 4.0 * p1 + 6.0 * z - 4.0 * m1 + m2) / (h * h * h * h);
    (d3, d4)
}

/// Evaluates the margins without judging them.
///
/// The allowance at node `i >= 1` is
/// `factor·h²·(|v⁗|/12 + (N-1)|v‴|/(6rᵢ))`, the leading truncation error
/// of the central stencil; at the origin it is
/// `factor·N·h²·(|v⁗|/12 + |v‴|/(3h))`. The derivatives are estimated by
/// the largest finite difference over nodes `i, i+1, i+2`, which also
/// covers profiles with a `r³` term at the origin.
pub fn supersolution_margins(
    barrier: &BarrierData,
    phi: &MajorantProfile,
    slack_factor: f64,
) -> Result<SupersolutionReport, BarrierError> {
    let grid = barrier.grid();
    let v = &barrier.v.values;
    let h = grid.h();
    let nf = barrier.dimension as f64;
    let last = grid.last();
    let mut raw = vec![0.0; grid.len()];
    let mut slack = vec![0.0; grid.len()];
    let mut margin = vec![0.0; grid.len()];
    let (mut worst_index, mut worst_margin) = (0, f64::NEG_INFINITY);
    let mut raw_nonnegative = 0;
    for i in 0..last {
        let r = grid.node(i);
        let lap = laplacian_at(grid, v, barrier.dimension, i);
        raw[i] = lap + phi.eval(r)? * v[i].powf(-barrier.gamma);
        let (mut t3, mut t4) = (0.0f64, 0.0f64);
        let window: Vec<usize> = (i..=i + 2).filter(|&j| j + 2 <= last).collect();
        let window = if window.is_empty() { vec![last - 2] } else { window };
        for j in window {
            let (d3, d4) = high_differences(v, h, j);
            t3 = t3.max(d3.abs());
            t4 = t4.max(d4.abs());
        }
        slack[i] = if i == 0 {
            slack_factor * nf * h * h * (t4 / 12.0 + t3 / (3.0 * h))
        } else {
            slack_factor * h * h * (t4 / 12.0 + (nf - 1.0) * t3 / (6.0 * r))
        };
        margin[i] = raw[i] - slack[i];
        if raw[i] >= 0.0 {
            raw_nonnegative += 1;
        }
        if margin[i] > worst_margin {
            worst_margin = margin[i];
            worst_index = i;
        }
    }
    Ok(SupersolutionReport { raw, slack, margin, worst_index, worst_margin, raw_nonnegative })
}

/// Like [`supersolution_margins`], failing on the worst node when any
/// margin is not strictly negative.
pub fn verify_supersolution(
    barrier: &BarrierData,
    phi: &MajorantProfile,
    slack_factor: f64,
) -> Result<SupersolutionReport, BarrierError> {
    let report = supersolution_margins(barrier, phi, slack_factor)?;
    if !report.passed() {
        return Err(BarrierError::SupersolutionViolation {
            index: report.worst_index,
            r: barrier.grid().node(report.worst_index),
            margin: report.worst_margin,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Provenance;
    use crate::potential::PotentialSpec;

    fn majorant(src: &str) -> MajorantProfile {
        MajorantProfile::new(PotentialSpec::parse(src).unwrap(), Provenance::RadialP)
    }

    #[test]
    fn integrability_examples() {
        let v = check_integrability(&majorant("(1+r)^(-3)"), 1e-8).unwrap();
        assert_eq!(v.classification, Classification::Convergent);
        assert!((v.value_estimate - 0.5).abs() < 1e-6, "{}", v.value_estimate);
        assert!(v.error_estimate < 1e-8);

        let v = check_integrability(&majorant("exp(-r)"), 1e-8).unwrap();
        assert_eq!(v.classification, Classification::Convergent);
        assert!((v.value_estimate - 1.0).abs() < 1e-6);

        let v = check_integrability(&majorant("(1+r)^(-2)"), 1e-8).unwrap();
        assert_eq!(v.classification, Classification::Divergent);
        // partials grow by about log 2 per doubling
        let n = v.partials.len();
        let step = v.partials[n - 1] - v.partials[n - 2];
        assert!((step - std::f64::consts::LN_2).abs() < 1e-3);
    }

    #[test]
    fn evaluation_failures_propagate() {
        let m = majorant("log(1-r)");
        assert!(matches!(check_integrability(&m, 1e-6), Err(BarrierError::Potential(_))));
    }

    #[test]
    fn k_examples() {
        let m = majorant("(1+r^2)^(-2)");
        let k3 = compute_k(&m, 3, 1e-9).unwrap();
        assert!((k3.reduced - 0.5).abs() < 1e-7);
        assert!((k3.double - 0.5).abs() < 1e-7);
        let k4 = compute_k(&m, 4, 1e-9).unwrap();
        assert!((k4.reduced - 0.25).abs() < 1e-7);
        assert!((k4.double - 0.25).abs() < 1e-7);
    }

    #[test]
    fn k_refuses_divergent_majorants() {
        assert_eq!(
            compute_k(&majorant("(1+r)^(-2)"), 3, 1e-8),
            Err(BarrierError::NotConvergent(Classification::Divergent))
        );
    }

    #[test]
    fn constant_examples() {
        assert!((barrier_constant(0.5, 1.0) - 1.224_744_871_391_589).abs() < 1e-15);
        assert!((barrier_constant(0.5, 2.0) - 1.259_921_049_894_873).abs() < 1e-15);
    }

    #[test]
    fn barrier_invariants_hold() {
        let m = majorant("(1+r^2)^(-2)");
        let grid = RadialGrid::new(40.0, 3999).unwrap();
        for gamma in [0.5, 1.0, 2.0] {
            let b = compute_barrier(&m, 3, gamma, 0.5, grid).unwrap();
            assert!(ulps_between(b.v.values[0], b.c) <= V_ULP_BOUND);
            assert_eq!(b.w.values[0], 0.5);
            assert!(b.w.values.windows(2).all(|p| p[1] <= p[0]));
            assert!(b.v.values.iter().all(|&x| x <= b.c || ulps_between(x, b.c) <= 4));
        }
    }

    #[test]
    fn sampled_w_matches_reduced_identity() {
        // w(r) = (N-2)^(-1) [r^(2-N) ∫₀^r σ^(N-1)Φ + ∫_r^∞ σΦ]; for N=3 and
        // Φ = (1+r²)^(-2) this is (atan r)/(2r) - 1/(2(1+r²)) + 1/(2(1+r²)).
        let m = majorant("(1+r^2)^(-2)");
        let grid = RadialGrid::new(10.0, 999).unwrap();
        let b = compute_barrier(&m, 3, 1.0, 0.5, grid).unwrap();
        let mut worst: f64 = 0.0;
        for i in 1..grid.len() {
            let r = grid.node(i);
            let inner = 0.5 * (r.atan() - r / (1.0 + r * r));
            let exact = inner / r + 0.5 / (1.0 + r * r);
            worst = worst.max((b.w.values[i] - exact).abs());
        }
        // fourth-order cumulative quadrature at h = 0.01
        assert!(worst < 1e-9, "max error {worst:e}");
    }

    #[test]
    fn too_small_k_is_rejected() {
        let m = majorant("(1+r^2)^(-2)");
        let grid = RadialGrid::new(40.0, 399).unwrap();
        assert!(matches!(compute_barrier(&m, 3, 1.0, 0.3, grid), Err(BarrierError::Invariant(_))));
    }

    #[test]
    fn supersolution_holds_on_fine_grid() {
        let m = majorant("(1+r^2)^(-2)");
        let grid = RadialGrid::new(40.0, 3999).unwrap();
        let b = compute_barrier(&m, 3, 1.0, 0.5, grid).unwrap();
        let report = verify_supersolution(&b, &m, DEFAULT_SLACK_FACTOR).unwrap();
        assert!(report.margin[..grid.last()].iter().all(|&x| x < 0.0));
        // away from the origin the raw inequality holds without allowance
        assert!(report.raw[10..grid.last()].iter().all(|&x| x < 0.0));
    }

    #[test]
    fn shrunken_barrier_violates() {
        let m = majorant("(1+r^2)^(-2)");
        let grid = RadialGrid::new(40.0, 3999).unwrap();
        let mut b = compute_barrier(&m, 3, 1.0, 0.5, grid).unwrap();
        b.v.values.iter_mut().for_each(|x| *x *= 0.1);
        // at the origin: 0.1Δv(0) + Φ(0)(0.1c)^(-1) = (10 - 0.1)/c > 0
        let err = verify_supersolution(&b, &m, DEFAULT_SLACK_FACTOR).unwrap_err();
        assert!(matches!(err, BarrierError::SupersolutionViolation { .. }));
    }

    #[test]
    fn vanishing_majorant_reduces_to_sign_of_laplacian() {
        let phi = MajorantProfile::new(
            PotentialSpec::from_fn("shell", |r| if (2.0..=3.0).contains(&r) { 0.0 } else { (1.0 + r * r).powi(-2) }),
            Provenance::UserSupplied,
        );
        let grid = RadialGrid::new(20.0, 1999).unwrap();
        let k = check_integrability(&phi, 1e-9).unwrap().value_estimate;
        let b = compute_barrier(&phi, 3, 1.0, k, grid).unwrap();
        let report = supersolution_margins(&b, &phi, DEFAULT_SLACK_FACTOR).unwrap();
        for i in 0..grid.last() {
            let r = grid.node(i);
            if (2.0..=3.0).contains(&r) {
                let lap = laplacian_at(grid, &b.v.values, 3, i);
                assert_eq!(report.raw[i], lap);
                assert!(lap < 0.0);
            }
        }
    }
}
