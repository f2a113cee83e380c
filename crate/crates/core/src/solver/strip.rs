//! The half-strip grid and nodal solution fields.
//!
//! The punctured disk maps to the half-strip `{(x, y) : 0 ≤ x < 2π/N,
//! y ≥ 0}` under `x = θ`, `y = −ln r`, with the angular direction periodic
//! across one fundamental period and the origin pushed to `y = ∞`. Grids
//! truncate at `y_max`, chosen so the strip weight `e^{−2·α_strip·y}` has
//! decayed below 1e−12; the far boundary then carries a zero-flux
//! condition whose error is at weight-floor level.

use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::tols;

/// Uniform tensor grid on one fundamental period of the half-strip.
/// Angular nodes `i = 0..n_theta` (periodic, no duplicated seam); depth
/// nodes `j = 0..=n_y` with `y = j·h_y`.
#[derive(Clone, Debug)]
pub struct StripGrid {
    pub n_theta: usize,
    pub n_y: usize,
    pub y_max: f64,
    pub n_sym: u32,
    pub h_theta: f64,
    pub h_y: f64,
}

impl StripGrid {
    pub fn new(prm: &ProblemParams, n_theta: usize, n_y: usize, y_max: Option<f64>) -> Result<Self> {
        if n_theta < tols::MIN_GRID || n_y < tols::MIN_GRID {
            return Err(Error::Params(format!(
                "strip grid needs at least {}×{} nodes, got {n_theta}×{n_y}",
                tols::MIN_GRID,
                tols::MIN_GRID
            )));
        }
        let y_max = y_max.unwrap_or_else(|| prm.default_y_max());
        if !(y_max > 0.0 && y_max.is_finite()) {
            return Err(Error::Params(format!("y_max must be positive, got {y_max}")));
        }
        let floor = (-2.0 * prm.alpha_strip * y_max).exp();
        if floor > tols::FARFIELD_WEIGHT_FLOOR * (1.0 + 1e-9) {
            return Err(Error::Params(format!(
                "truncation too shallow: far-field weight {floor:.3e} above {:.1e}",
                tols::FARFIELD_WEIGHT_FLOOR
            )));
        }
        let period = prm.period();
        Ok(Self {
            n_theta,
            n_y,
            y_max,
            n_sym: prm.n_sym,
            h_theta: period / n_theta as f64,
            h_y: y_max / n_y as f64,
        })
    }

    pub fn default_for(prm: &ProblemParams) -> Result<Self> {
        Self::new(prm, tols::DEFAULT_NX, tols::DEFAULT_NY, None)
    }

    /// Halve both spacings, keeping the same physical domain.
    pub fn refine(&self, prm: &ProblemParams) -> Result<Self> {
        Self::new(prm, self.n_theta * 2, self.n_y * 2, Some(self.y_max))
    }

    pub fn n_dof(&self) -> usize {
        self.n_theta * (self.n_y + 1)
    }

    /// Flat index of node `(i, j)`; `i` wraps periodically.
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= self.n_y);
        j * self.n_theta + (i % self.n_theta)
    }

    pub fn theta(&self, i: usize) -> f64 {
        i as f64 * self.h_theta
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.h_y
    }

    pub fn r(&self, j: usize) -> f64 {
        (-self.y(j)).exp()
    }
}

/// Nodal values on a [`StripGrid`].
#[derive(Clone, Debug)]
pub struct SolutionField {
    pub grid: StripGrid,
    pub values: Vec<f64>,
}

impl SolutionField {
    pub fn new(grid: StripGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_dof() {
            return Err(Error::Linear(format!(
                "field length {} does not match grid with {} nodes",
                values.len(),
                grid.n_dof()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::Linear("field contains non-finite values".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    /// Outward normal derivative `∂v/∂n = −∂v/∂y` at the boundary node
    /// `(i, 0)`, by the second-order one-sided stencil.
    pub fn boundary_normal_derivative(&self, i: usize) -> f64 {
        let (v0, v1, v2) = (self.value(i, 0), self.value(i, 1), self.value(i, 2));
        (3.0 * v0 - 4.0 * v1 + v2) / (2.0 * self.grid.h_y)
    }

    /// Average of `v` over the circle `r = e^{−y_j}`; equals the plain row
    /// mean because the grid covers one period uniformly.
    pub fn circle_average(&self, j: usize) -> f64 {
        let n = self.grid.n_theta;
        let row = &self.values[j * n..(j + 1) * n];
        row.iter().sum::<f64>() / n as f64
    }

    /// Centered (periodic in x, one-sided at the y edges) strip gradient.
    pub fn strip_gradient(&self, i: usize, j: usize) -> (f64, f64) {
        let n = self.grid.n_theta;
        let ux = (self.value(i + 1, j) - self.value((i + n - 1) % n, j)) / (2.0 * self.grid.h_theta);
        let uy = if j == 0 {
            (self.value(i, 1) - self.value(i, 0)) / self.grid.h_y
        } else if j == self.grid.n_y {
            (self.value(i, j) - self.value(i, j - 1)) / self.grid.h_y
        } else {
            (self.value(i, j + 1) - self.value(i, j - 1)) / (2.0 * self.grid.h_y)
        };
        (ux, uy)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn boundary_max(&self) -> f64 {
        self.values[..self.grid.n_theta]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Subtract the mean, fixing the additive kernel of pure-flux problems.
    pub fn remove_mean(&mut self) -> f64 {
        let mean = self.values.iter().sum::<f64>() / self.values.len() as f64;
        for v in &mut self.values {
            *v -= mean;
        }
        mean
    }
}
