//! Separation parameters of quasiradial p-harmonic functions.
//!
//! A quasiradial function `f = r^k a(θ)` with `N`-fold angular symmetry is
//! p-harmonic only when the radial exponent `k` solves a quadratic whose
//! coefficients involve `b = p/(p-2)`:
//!
//! ```text
//! (2N-1)(b+1) k² − 2(N² b + 2N − 1) k + N²(1+b) = 0.
//! ```
//!
//! The larger root is the branch of interest (it tends to `N` as `p → 2⁺`,
//! matching the harmonic function `r^N cos(Nθ)`; the smaller tends to
//! `N/(2N-1)`). Alongside `k` the parameter set carries the auxiliary
//! frequency `λ = sqrt(k² − 2k/(b+1))` used by the closed-form profile
//! parametrization, and the weight exponents of the function spaces the
//! linearized problem lives in.

use crate::error::{Error, Result};
use crate::tols;
use serde::{Deserialize, Serialize};

/// Which root of the exponent quadratic to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Larger,
    Smaller,
}

/// Validated parameter set for one quasiradial family member.
#[derive(Clone, Copy, Debug)]
pub struct ProblemParams {
    /// Exponent of the p-Laplacian, `p > 2`.
    pub p: f64,
    /// Angular symmetry order `N ≥ 1`; the profile has period `2π/N`.
    pub n_sym: u32,
    /// Chosen root branch.
    pub branch: Branch,
    /// `b = p/(p-2)`.
    pub b: f64,
    /// Radial exponent (root of the exponent quadratic).
    pub k: f64,
    /// Auxiliary frequency `λ = sqrt(k² − 2k/(b+1)) ≥ 0`.
    pub lambda: f64,
    /// Gradient-weight exponent `(p-2)(k-1)/2` of the disk-side spaces.
    pub alpha_space: f64,
    /// Strip bookkeeping exponent `alpha_space + 1` (the Jacobian
    /// `r = e^{-y}` contributes the +1 on zero-order terms).
    pub alpha_strip: f64,
    /// Zero-order weight exponent; defaults to the midpoint of the admissible
    /// window `(alpha_space − 1, 2·alpha_space − 1)`.
    pub beta: f64,
}

/// Coefficients `(A, B, C)` of the exponent quadratic `A k² + B k + C = 0`.
pub fn exponent_quadratic(p: f64, n_sym: u32) -> (f64, f64, f64) {
    let b = p / (p - 2.0);
    let n = n_sym as f64;
    (
        (2.0 * n - 1.0) * (b + 1.0),
        -2.0 * (n * n * b + 2.0 * n - 1.0),
        n * n * (1.0 + b),
    )
}

/// Residual of the exponent quadratic at `k`, relative to coefficient scale.
pub fn exponent_residual(p: f64, n_sym: u32, k: f64) -> f64 {
    let (qa, qb, qc) = exponent_quadratic(p, n_sym);
    let scale = qa.abs() * k * k + qb.abs() * k.abs() + qc.abs();
    ((qa * k + qb) * k + qc).abs() / scale.max(1.0)
}

/// Solve the exponent quadratic for the requested branch.
///
/// Uses the cancellation-free quadratic formula (the root far from
/// cancellation via the discriminant, the other via Vieta). Both roots are
/// real and positive for every `p > 2`, `N ≥ 1`; at `N = 1` the quadratic is
/// a perfect square and both branches return the double root `k = 1`.
pub fn solve_exponent(p: f64, n_sym: u32, branch: Branch) -> Result<f64> {
    if !(p > 2.0) || !p.is_finite() {
        return Err(Error::Params(format!("need finite p > 2, got p = {p}")));
    }
    if n_sym < 1 {
        return Err(Error::Params("need symmetry order N >= 1".into()));
    }
    let (qa, qb, qc) = exponent_quadratic(p, n_sym);
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        // Cannot happen for p > 2; tiny negative values are roundoff at the
        // N = 1 double root.
        if disc > -1e-9 * qb * qb {
            return Ok(-qb / (2.0 * qa));
        }
        return Err(Error::Params(format!(
            "exponent quadratic has no real root (p = {p}, N = {n_sym})"
        )));
    }
    let sq = disc.sqrt();
    // qb < 0 here, so -qb + sq is the cancellation-free combination.
    let r_big = (-qb + sq) / (2.0 * qa);
    let r_small = qc / (qa * r_big);
    let k = match branch {
        Branch::Larger => r_big.max(r_small),
        Branch::Smaller => r_big.min(r_small),
    };
    let res = exponent_residual(p, n_sym, k);
    if res > tols::EXPONENT_RESIDUAL {
        return Err(Error::Params(format!(
            "exponent root residual {res:.3e} exceeds {:.1e}",
            tols::EXPONENT_RESIDUAL
        )));
    }
    Ok(k)
}

/// Auxiliary frequency `λ = sqrt(k² − 2k/(b+1))`; fails loudly if the
/// radicand is negative beyond roundoff.
pub fn lambda_param(p: f64, k: f64) -> Result<f64> {
    let b = p / (p - 2.0);
    let rad = k * k - 2.0 * k / (b + 1.0);
    if rad < 0.0 {
        if rad > -1e-14 * (k * k).max(1.0) {
            return Ok(0.0);
        }
        return Err(Error::Params(format!(
            "negative λ-radicand {rad:.3e} at p = {p}, k = {k}"
        )));
    }
    Ok(rad.sqrt())
}

impl ProblemParams {
    /// Build and validate the parameter set for `(p, N)` on the given branch.
    pub fn new(p: f64, n_sym: u32, branch: Branch) -> Result<Self> {
        let k = solve_exponent(p, n_sym, branch)?;
        let b = p / (p - 2.0);
        let lambda = lambda_param(p, k)?;
        let alpha_space = (p - 2.0) * (k - 1.0) / 2.0;
        let alpha_strip = alpha_space + 1.0;
        let beta = (3.0 * alpha_space - 2.0) / 2.0;
        Ok(ProblemParams {
            p,
            n_sym,
            branch,
            b,
            k,
            lambda,
            alpha_space,
            alpha_strip,
            beta,
        })
    }

    /// Replace the zero-order weight exponent; the value must lie in the
    /// admissible window, which requires `k > 1`.
    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        let (lo, hi) = self
            .beta_window()
            .ok_or_else(|| Error::Params(format!("no admissible β window at k = {}", self.k)))?;
        if !(beta > lo && beta < hi) {
            return Err(Error::Params(format!(
                "β = {beta} outside admissible window ({lo}, {hi})"
            )));
        }
        self.beta = beta;
        Ok(self)
    }

    /// Admissible window `(alpha_space − 1, 2·alpha_space − 1)` for the
    /// zero-order weight, nonempty exactly when `k > 1`.
    pub fn beta_window(&self) -> Option<(f64, f64)> {
        if self.alpha_space > 0.0 {
            Some((self.alpha_space - 1.0, 2.0 * self.alpha_space - 1.0))
        } else {
            None
        }
    }

    /// True when the stored β lies strictly inside the admissible window.
    pub fn beta_admissible(&self) -> bool {
        match self.beta_window() {
            Some((lo, hi)) => self.beta > lo && self.beta < hi,
            None => false,
        }
    }

    /// Fundamental angular period `2π/N`.
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.n_sym as f64
    }

    /// Far-field truncation depth: smallest integer `y_max` with
    /// `e^{-2 α_strip y_max} < 10⁻¹²`.
    pub fn default_y_max(&self) -> f64 {
        (-tols::FARFIELD_WEIGHT_FLOOR.ln() / (2.0 * self.alpha_strip)).ceil()
    }
}
