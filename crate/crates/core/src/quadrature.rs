//! Tensor-product quadratures for the punctured disk and the half-strip.
//!
//! Both rules share the same construction: a composite Simpson rule in the
//! non-periodic direction, with panel breakpoints that callers place at
//! known kinks of the integrand (the skew cutoff is only C² at `r = 1/2`,
//! test fields have compact support edges), crossed with an equispaced
//! trapezoid rule in the periodic direction, which is spectrally accurate
//! for smooth periodic integrands. The disk rule folds the Jacobian `r`
//! of `dA = r dr dθ` into [`DiskQuadrature::integrate`]; the strip rule
//! integrates against plain `dx dy`.

use crate::error::{Error, Result};
use crate::exec;
use crate::tols;
use std::f64::consts::TAU;

/// Composite Simpson nodes/weights on `[lo, hi]` split at `breakpoints`,
/// with `n_per_panel` (even, ≥ 2) subintervals per panel. All weights are
/// strictly positive.
pub fn simpson_line(
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    n_per_panel: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Params(format!(
            "simpson_line needs finite lo < hi, got [{lo}, {hi}]"
        )));
    }
    if n_per_panel < 2 || n_per_panel % 2 != 0 {
        return Err(Error::Params(format!(
            "simpson_line needs an even subinterval count >= 2, got {n_per_panel}"
        )));
    }
    let mut edges = vec![lo];
    let mut inner: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&b| b > lo && b < hi)
        .collect();
    inner.sort_by(|x, y| x.total_cmp(y));
    inner.dedup();
    edges.extend(inner);
    edges.push(hi);

    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for panel in edges.windows(2) {
        let (a, b) = (panel[0], panel[1]);
        let h = (b - a) / n_per_panel as f64;
        for i in 0..=n_per_panel {
            let w = h / 3.0
                * if i == 0 || i == n_per_panel {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
            nodes.push(a + i as f64 * h);
            weights.push(w);
        }
    }
    Ok((nodes, weights))
}

/// Product rule on the annulus `r ∈ [r_lo, r_hi]`, `θ ∈ [0, 2π)`, measure
/// `r dr dθ`.
pub struct DiskQuadrature {
    pub nodes_r: Vec<f64>,
    pub weights_r: Vec<f64>,
    pub nodes_theta: Vec<f64>,
    pub weight_theta: f64,
}

impl DiskQuadrature {
    pub fn new(
        r_lo: f64,
        r_hi: f64,
        breakpoints: &[f64],
        n_r_per_panel: usize,
        n_theta: usize,
    ) -> Result<Self> {
        if !(r_lo > 0.0 && r_hi > r_lo) {
            return Err(Error::Params(format!(
                "disk quadrature needs 0 < r_lo < r_hi, got [{r_lo}, {r_hi}]"
            )));
        }
        if n_theta < 8 {
            return Err(Error::Params(format!(
                "disk quadrature needs at least 8 angular nodes, got {n_theta}"
            )));
        }
        let (nodes_r, weights_r) = simpson_line(r_lo, r_hi, breakpoints, n_r_per_panel)?;
        let weight_theta = TAU / n_theta as f64;
        let nodes_theta = (0..n_theta).map(|j| j as f64 * weight_theta).collect();
        Ok(Self {
            nodes_r,
            weights_r,
            nodes_theta,
            weight_theta,
        })
    }

    /// The punctured unit disk, hollowed at the standard inner radius and
    /// with a radial breakpoint at the cutoff kink `r = 1/2`.
    pub fn unit_disk(n_r_per_panel: usize, n_theta: usize) -> Result<Self> {
        Self::new(
            tols::QUADRATURE_EPS,
            1.0,
            &[0.5],
            n_r_per_panel,
            n_theta,
        )
    }

    /// `∫∫ f(r, θ) r dr dθ` over the annulus.
    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64 + Sync) -> f64 {
        let nt = self.nodes_theta.len();
        exec::sum(self.nodes_r.len() * nt, |idx| {
            let (i, j) = (idx / nt, idx % nt);
            let r = self.nodes_r[i];
            self.weights_r[i] * self.weight_theta * r * f(r, self.nodes_theta[j])
        })
    }

    pub fn area(&self) -> f64 {
        self.integrate(|_, _| 1.0)
    }
}

/// Product rule on the half-strip `x ∈ [0, 2π)`, `y ∈ [0, y_max]`, measure
/// `dx dy`; `x` is the angle, `y = −ln r`.
pub struct StripQuadrature {
    pub nodes_x: Vec<f64>,
    pub weight_x: f64,
    pub nodes_y: Vec<f64>,
    pub weights_y: Vec<f64>,
}

impl StripQuadrature {
    pub fn new(
        y_max: f64,
        breakpoints: &[f64],
        n_y_per_panel: usize,
        n_x: usize,
    ) -> Result<Self> {
        if !(y_max > 0.0 && y_max.is_finite()) {
            return Err(Error::Params(format!(
                "strip quadrature needs finite y_max > 0, got {y_max}"
            )));
        }
        if n_x < 8 {
            return Err(Error::Params(format!(
                "strip quadrature needs at least 8 periodic nodes, got {n_x}"
            )));
        }
        let (nodes_y, weights_y) = simpson_line(0.0, y_max, breakpoints, n_y_per_panel)?;
        let weight_x = TAU / n_x as f64;
        let nodes_x = (0..n_x).map(|j| j as f64 * weight_x).collect();
        Ok(Self {
            nodes_x,
            weight_x,
            nodes_y,
            weights_y,
        })
    }

    /// Strip image of [`DiskQuadrature::unit_disk`]: breakpoint at the
    /// cutoff kink `y = ln 2` (the image of `r = 1/2`).
    pub fn half_strip(y_max: f64, n_y_per_panel: usize, n_x: usize) -> Result<Self> {
        Self::new(y_max, &[2.0f64.ln()], n_y_per_panel, n_x)
    }

    /// `∫∫ f(x, y) dx dy` over the truncated strip.
    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64 + Sync) -> f64 {
        let nx = self.nodes_x.len();
        exec::sum(self.nodes_y.len() * nx, |idx| {
            let (i, j) = (idx / nx, idx % nx);
            self.weights_y[i] * self.weight_x * f(self.nodes_x[j], self.nodes_y[i])
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_are_positive_and_area_is_exact() {
        let quad = DiskQuadrature::unit_disk(64, 64).unwrap();
        assert!(quad.weights_r.iter().all(|&w| w > 0.0));
        let eps = tols::QUADRATURE_EPS;
        let exact = PI * (1.0 - eps * eps);
        assert!(
            (quad.area() - exact).abs() < 1e-10,
            "area defect {:.3e}",
            (quad.area() - exact).abs()
        );
    }

    #[test]
    fn radial_rule_is_exact_for_cubics() {
        // f = r² makes the radial integrand r³, exactly integrated by Simpson.
        let quad = DiskQuadrature::new(0.1, 1.0, &[], 16, 16).unwrap();
        let exact = TAU * (1.0f64.powi(4) - 0.1f64.powi(4)) / 4.0;
        assert!((quad.integrate(|r, _| r * r) - exact).abs() < 1e-13);
    }

    #[test]
    fn angular_rule_is_spectrally_exact() {
        let quad = DiskQuadrature::new(0.5, 1.0, &[], 8, 16).unwrap();
        // ∫ cos²(3θ) dθ = π; radial part ∫ r dr = (1 − 1/4)/2.
        let exact = PI * (1.0 - 0.25) / 2.0;
        let got = quad.integrate(|_, t| (3.0 * t).cos().powi(2));
        assert!((got - exact).abs() < 1e-12);
    }

    #[test]
    fn breakpoint_recovers_exactness_across_a_kink() {
        let f = |r: f64| (r - 0.5).abs();
        // ∫ |r − 1/2| r dr splits into two quadratic pieces at r = 1/2.
        let piece = |a: f64, b: f64, sgn: f64| {
            let prim = |r: f64| sgn * (r.powi(3) / 3.0 - 0.25 * r * r);
            prim(b) - prim(a)
        };
        let exact = TAU * (piece(0.1, 0.5, -1.0) + piece(0.5, 1.0, 1.0));
        let with_bp = DiskQuadrature::new(0.1, 1.0, &[0.5], 8, 16).unwrap();
        assert!((with_bp.integrate(|r, _| f(r)) - exact).abs() < 1e-13);
        // Without the breakpoint the same node budget is visibly worse.
        let without = DiskQuadrature::new(0.1, 1.0, &[], 8, 16).unwrap();
        assert!((without.integrate(|r, _| f(r)) - exact).abs() > 1e-7);
    }

    #[test]
    fn strip_rule_integrates_decaying_weights() {
        let y_max = 14.0;
        let quad = StripQuadrature::half_strip(y_max, 2048, 16).unwrap();
        let exact = TAU * (1.0 - (-2.0 * y_max).exp()) / 2.0;
        let got = quad.integrate(|_, y| (-2.0 * y).exp());
        assert!((got - exact).abs() < 1e-9, "defect {:.3e}", (got - exact).abs());
    }

    #[test]
    fn rejects_bad_configuration() {
        assert!(simpson_line(1.0, 0.0, &[], 4).is_err());
        assert!(simpson_line(0.0, 1.0, &[], 3).is_err());
        assert!(DiskQuadrature::new(0.0, 1.0, &[], 4, 16).is_err());
        assert!(DiskQuadrature::new(0.1, 1.0, &[], 4, 4).is_err());
        assert!(StripQuadrature::new(-1.0, &[], 4, 16).is_err());
    }
}
