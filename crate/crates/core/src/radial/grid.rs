use serde::Serialize;

use super::RadialError;

/// Minimum number of interior nodes.
pub const MIN_INTERIOR_NODES: usize = 16;

/// Uniform grid `r_i = i·h`, `i = 0..=M+1`, with `h = R/(M+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialGrid {
    radius: f64,
    interior: usize,
    h: f64,
}

impl RadialGrid {
    pub fn new(radius: f64, interior: usize) -> Result<RadialGrid, RadialError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(RadialError::InvalidGrid(format!("radius must be positive, got {radius}")));
        }
        if interior < MIN_INTERIOR_NODES {
            return Err(RadialError::InvalidGrid(format!(
                "need at least {MIN_INTERIOR_NODES} interior nodes, got {interior}"
            )));
        }
        Ok(RadialGrid { radius, interior, h: radius / (interior + 1) as f64 })
    }

    /// Grid on `[0, radius]` whose spacing is the closest to `h`.
    pub fn with_spacing(radius: f64, h: f64) -> Result<RadialGrid, RadialError> {
        if !(h > 0.0) {
            return Err(RadialError::InvalidGrid(format!("spacing must be positive, got {h}")));
        }
        let cells = (radius / h).round().max(1.0) as usize;
        RadialGrid::new(radius, cells.saturating_sub(1))
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Interior node count `M`.
    pub fn interior(&self) -> usize {
        self.interior
    }

    /// Total node count `M + 2`.
    pub fn len(&self) -> usize {
        self.interior + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Index of the Dirichlet node `r = R`.
    pub fn last(&self) -> usize {
        self.interior + 1
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.last() {
            self.radius
        } else {
            i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.node(i))
    }
}

/// Nodal values of a radial function on a [`RadialGrid`], endpoints included.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<RadialProfile, RadialError> {
        if values.len() != grid.len() {
            return Err(RadialError::ShapeMismatch { expected: grid.len(), got: values.len() });
        }
        Ok(RadialProfile { grid, values })
    }

    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> RadialProfile {
        RadialProfile { grid, values: grid.nodes().map(f).collect() }
    }

    pub fn zeros(grid: RadialGrid) -> RadialProfile {
        RadialProfile { grid, values: vec![0.0; grid.len()] }
    }

    /// Piecewise-linear interpolation; constant extension beyond `R`.
    pub fn interpolate(&self, r: f64) -> f64 {
        let last = self.grid.last();
        if r <= 0.0 {
            return self.values[0];
        }
        if r >= self.grid.radius() {
            return self.values[last];
        }
        let i = ((r / self.grid.h()).floor() as usize).min(last - 1);
        let (r0, r1) = (self.grid.node(i), self.grid.node(i + 1));
        let t = (r - r0) / (r1 - r0);
        if t == 0.0 {
            self.values[i]
        } else {
            self.values[i] + t * (self.values[i + 1] - self.values[i])
        }
    }

    /// Values interpolated onto another grid.
    pub fn resample(&self, grid: RadialGrid) -> RadialProfile {
        RadialProfile::from_fn(grid, |r| self.interpolate(r))
    }

    pub fn max_abs_diff(&self, other: &RadialProfile) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}
