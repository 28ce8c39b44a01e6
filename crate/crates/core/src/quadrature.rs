//! One-dimensional quadrature: adaptive Simpson, fixed Gauss–Legendre
//! panels, and a doubling-radius driver for integrals over `[0, ∞)`.

use std::sync::OnceLock;

const SIMPSON_MAX_DEPTH: u32 = 48;

/// Adaptive Simpson on `[a, b]` with absolute tolerance `tol`.
pub fn adaptive_simpson<E>(f: &mut impl FnMut(f64) -> Result<f64, E>, a: f64, b: f64, tol: f64) -> Result<f64, E> {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a)?, f(m)?, f(b)?);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, E> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || m <= a || b <= m {
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Gauss–Legendre rule on `[-1, 1]`.
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> GaussLegendre {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn integrate<E>(&self, f: &mut impl FnMut(f64) -> Result<f64, E>, a: f64, b: f64) -> Result<f64, E> {
        let (c, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(c + half * x)?;
        }
        Ok(half * sum)
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Shared 20-point rule.
pub fn gauss20() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailStatus {
    Converged,
    Diverged,
    Indeterminate,
}

#[derive(Debug, Clone)]
pub struct TailIntegral {
    pub status: TailStatus,
    /// `∫₀^{base·2^k}` for each doubling reached.
    pub partials: Vec<f64>,
    /// Tail-extrapolated estimate of the limit.
    pub value: f64,
    /// Last relative change of the extrapolated sequence.
    pub relative_change: f64,
    /// Largest truncation radius that was integrated.
    pub radius: f64,
}

/// Settings for [`integrate_to_infinity`].
#[derive(Debug, Clone, Copy)]
pub struct TailRule {
    pub base: f64,
    pub max_doublings: usize,
    pub tol: f64,
    /// Required number of consecutive small changes.
    pub consecutive: usize,
    /// Growth over `divergence_window` doublings that marks divergence.
    pub divergence_margin: f64,
    pub divergence_window: usize,
}

impl TailRule {
    pub fn new(tol: f64) -> TailRule {
        TailRule { base: 1.0, max_doublings: 20, tol, consecutive: 3, divergence_margin: 1.0, divergence_window: 5 }
    }
}

/// Largest ratio of successive increments accepted as geometric decay
/// for Aitken extrapolation.
const AITKEN_MAX_RATIO: f64 = 0.95;

/// Aitken Δ² applied to the last three partial integrals, falling back to
/// the raw partial when the increments do not look geometric.
fn extrapolate(partials: &[f64]) -> f64 {
    let k = partials.len() - 1;
    if k < 2 {
        return partials[k];
    }
    let d1 = partials[k - 1] - partials[k - 2];
    let d2 = partials[k] - partials[k - 1];
    if d1 == 0.0 {
        return partials[k];
    }
    let ratio = d2 / d1;
    if ratio > 0.0 && ratio <= AITKEN_MAX_RATIO {
        partials[k] + d2 * ratio / (1.0 - ratio)
    } else {
        partials[k]
    }
}

/// Integrates over `[0, ∞)` by summing `segment(a, b)` over the doubling
/// radii `0, base, 2·base, …, base·2^max_doublings`.
///
/// Converged once the extrapolated sequence changes by less than
/// `tol·(1 + |value|)` on `consecutive` successive doublings. Without
/// convergence the integral is divergent when the partials grew by more
/// than `divergence_margin` over the last `divergence_window` doublings,
/// and indeterminate otherwise.
pub fn integrate_to_infinity<E>(
    mut segment: impl FnMut(f64, f64) -> Result<f64, E>,
    rule: TailRule,
) -> Result<TailIntegral, E> {
    let mut partials = vec![segment(0.0, rule.base)?];
    let mut extrapolated = vec![partials[0]];
    let mut streak = 0;
    let mut lo = rule.base;
    for _ in 0..rule.max_doublings {
        let hi = 2.0 * lo;
        let next = partials.last().unwrap() + segment(lo, hi)?;
        partials.push(next);
        let est = extrapolate(&partials);
        let prev = *extrapolated.last().unwrap();
        extrapolated.push(est);
        let change = (est - prev).abs() / (1.0 + est.abs());
        streak = if change < rule.tol { streak + 1 } else { 0 };
        lo = hi;
        if streak >= rule.consecutive {
            return Ok(TailIntegral {
                status: TailStatus::Converged,
                partials,
                value: est,
                relative_change: change,
                radius: hi,
            });
        }
    }
    let n = partials.len() - 1;
    let growth = partials[n] - partials[n.saturating_sub(rule.divergence_window)];
    let status = if growth > rule.divergence_margin { TailStatus::Diverged } else { TailStatus::Indeterminate };
    let value = *extrapolated.last().unwrap();
    let relative_change = (value - extrapolated[extrapolated.len() - 2]).abs() / (1.0 + value.abs());
    Ok(TailIntegral { status, partials, value, relative_change, radius: lo })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn ok(f: impl Fn(f64) -> f64) -> impl FnMut(f64) -> Result<f64, Infallible> {
        move |x| Ok(f(x))
    }

    #[test]
    fn simpson_integrates_smooth_functions() {
        let v = adaptive_simpson(&mut ok(f64::sin), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
        let v = adaptive_simpson(&mut ok(|x| x.sqrt()), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn gauss_legendre_weights_and_exactness() {
        let rule = GaussLegendre::new(20);
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        // exact through degree 39
        let v = rule.integrate(&mut ok(|x| x.powi(38)), 0.0, 1.0).unwrap();
        assert!((v - 1.0 / 39.0).abs() < 1e-15);
        let v = gauss20().integrate(&mut ok(f64::exp), -1.0, 2.0).unwrap();
        assert!((v - (2f64.exp() - (-1f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn aitken_is_exact_on_geometric_tails() {
        let partials: Vec<f64> = (0..6).map(|k| 3.0 - 0.5f64.powi(k)).collect();
        assert!((extrapolate(&partials) - 3.0).abs() < 1e-15);
        // log-type growth is left alone
        let partials = [1.0, 2.0, 3.0];
        assert_eq!(extrapolate(&partials), 3.0);
    }

    #[test]
    fn doubling_driver_classifies() {
        let seg = |f: fn(f64) -> f64| move |a: f64, b: f64| adaptive_simpson(&mut ok(f), a, b, 1e-13);
        let t = integrate_to_infinity(seg(|r| r * (-r).exp()), TailRule::new(1e-9)).unwrap();
        assert_eq!(t.status, TailStatus::Converged);
        assert!((t.value - 1.0).abs() < 1e-9);
        let t = integrate_to_infinity(seg(|r| r / (1.0 + r).powi(2)), TailRule::new(1e-9)).unwrap();
        assert_eq!(t.status, TailStatus::Diverged);
        assert_eq!(t.partials.len(), 21);
        // integrand decaying like 1/(r log² r): converges far too slowly to certify
        let t =
            integrate_to_infinity(seg(|r| 1.0 / ((2.0 + r) * (2.0 + r).ln().powi(2))), TailRule::new(1e-9)).unwrap();
        assert_eq!(t.status, TailStatus::Indeterminate);
    }
}
