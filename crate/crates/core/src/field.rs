//! The quasiradial function `f = r^k a(θ)` and its certification as a
//! p-harmonic function.
//!
//! Certification is deliberately external: [`p_laplace_residual`] knows
//! nothing about the construction of `f`. It applies the nonlinear operator
//! `div(|∇f|^{p−2}∇f)` by nested centered differences in Cartesian
//! coordinates to an arbitrary point evaluator and reports max-norm
//! residuals for a sequence of spacings, so a convergence study can confirm
//! the residual is pure truncation error. A second, independent
//! cross-check ([`boundary_curve_check`]) evaluates the closed-curve
//! parametrization of the same function and compares values pointwise after
//! conversion to polar coordinates.

use crate::error::{Error, Result};
use crate::exec;
use crate::params::ProblemParams;
use crate::profile::AngularProfile;

/// Immutable evaluator for `f = r^k a(θ)`.
#[derive(Clone, Debug)]
pub struct QuasiradialField<'a> {
    pub k: f64,
    pub profile: &'a AngularProfile,
}

impl<'a> QuasiradialField<'a> {
    pub fn new(prm: &ProblemParams, profile: &'a AngularProfile) -> Self {
        QuasiradialField { k: prm.k, profile }
    }

    /// `f(r, θ) = r^k·a(θ)`; zero at the origin since `k > 0`.
    pub fn eval_polar(&self, r: f64, theta: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        r.powf(self.k) * self.profile.eval(theta)
    }

    /// Cartesian evaluation via `atan2`.
    pub fn eval_xy(&self, x: f64, y: f64) -> f64 {
        self.eval_polar(x.hypot(y), y.atan2(x))
    }
}

/// Convenience form of the evaluator used by the examples and the CLI.
pub fn eval_f(prm: &ProblemParams, profile: &AngularProfile, r: f64, theta: f64) -> f64 {
    QuasiradialField::new(prm, profile).eval_polar(r, theta)
}

/// Discrete `div(|∇f|^{p−2}∇f)` at one point, spacing `h`.
///
/// The gradient is formed by centered first differences of `f` with step
/// `h`, the divergence by centered first differences of the resulting flux
/// with the same step, giving an `O(h²)`-consistent composite on smooth
/// non-degenerate fields. The stencil reaches `2h` from the center.
pub fn p_laplace_residual_at(
    f: &(impl Fn(f64, f64) -> f64 + ?Sized),
    p: f64,
    x: f64,
    y: f64,
    h: f64,
) -> f64 {
    let flux = |x: f64, y: f64| -> (f64, f64) {
        let fx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
        let fy = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
        let w = (fx * fx + fy * fy).powf((p - 2.0) / 2.0);
        (w * fx, w * fy)
    };
    let (f1e, _) = flux(x + h, y);
    let (f1w, _) = flux(x - h, y);
    let (_, f2n) = flux(x, y + h);
    let (_, f2s) = flux(x, y - h);
    (f1e - f1w) / (2.0 * h) + (f2n - f2s) / (2.0 * h)
}

/// Probe annulus for the residual study; bounded away from the origin where
/// the quasiradial field loses smoothness.
pub const PROBE_R_LO: f64 = 0.25;
pub const PROBE_R_HI: f64 = 0.9;

/// Max-norm p-Laplace residual on the probe annulus for each spacing.
///
/// Probe points form a fixed polar lattice shrunk so every stencil point
/// stays inside `[PROBE_R_LO, PROBE_R_HI]` for the largest spacing.
/// Spacings must keep the stencil away from the origin (`2h < PROBE_R_LO`).
pub fn p_laplace_residual(
    f: &(impl Fn(f64, f64) -> f64 + Sync + ?Sized),
    p: f64,
    spacings: &[f64],
) -> Result<Vec<f64>> {
    let h_max = spacings.iter().cloned().fold(0.0f64, f64::max);
    if !(h_max > 0.0) {
        return Err(Error::Field("need positive spacings".into()));
    }
    if 2.0 * h_max >= PROBE_R_LO {
        return Err(Error::Field(format!(
            "spacing {h_max} reaches the origin: stencil radius 2h must stay below {PROBE_R_LO}"
        )));
    }
    let (r_lo, r_hi) = (PROBE_R_LO + 2.0 * h_max, PROBE_R_HI - 2.0 * h_max);
    let (nr, nt) = (16usize, 48usize);
    let residuals = spacings
        .iter()
        .map(|&h| {
            exec::max(nr * nt, |idx| {
                let (i, j) = (idx / nt, idx % nt);
                let r = r_lo + (r_hi - r_lo) * (i as f64 + 0.5) / nr as f64;
                let theta = std::f64::consts::TAU * j as f64 / nt as f64;
                p_laplace_residual_at(f, p, r * theta.cos(), r * theta.sin(), h).abs()
            })
        })
        .collect();
    Ok(residuals)
}

/// Least-squares slope of `log(residual)` against `log(h)` — the observed
/// convergence order of a refinement study.
pub fn observed_order(spacings: &[f64], residuals: &[f64]) -> f64 {
    assert_eq!(spacings.len(), residuals.len());
    let n = spacings.len() as f64;
    let xs: Vec<f64> = spacings.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = residuals.iter().map(|r| r.max(1e-300).ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// One point of the closed-curve parametrization of `f`.
///
/// Returns `(x, y, f)` with
///
/// ```text
/// x + iy = h^{2N−1}[(k+λ)e^{iτ} + (k−λ)e^{−i(2N−1)τ}],
/// f      = h^{k(2N−1)}·cos(Nτ).
/// ```
pub fn curve_point(prm: &ProblemParams, tau_curve: f64, h: f64) -> (f64, f64, f64) {
    let (k, lambda) = (prm.k, prm.lambda);
    let n = prm.n_sym as f64;
    let m = 2.0 * n - 1.0;
    let scale = h.powf(m);
    let x = scale * ((k + lambda) * tau_curve.cos() + (k - lambda) * (m * tau_curve).cos());
    let y = scale * ((k + lambda) * tau_curve.sin() - (k - lambda) * (m * tau_curve).sin());
    let f = h.powf(k * m) * (n * tau_curve).cos();
    (x, y, f)
}

/// Compare the closed-curve parametrization against `r^k a(θ)` along one
/// curve; returns the max mismatch relative to the curve's largest `|f|`.
///
/// The two representations share a single positive scalar fixed at the
/// `τ = 0 ↔ θ = 0` point: there `r = 2k·h^{2N−1}` and `f = h^{k(2N−1)}`,
/// so the quasiradial side is scaled by `(2k)^{−k}`.
pub fn boundary_curve_check(
    prm: &ProblemParams,
    profile: &AngularProfile,
    tau_grid: &[f64],
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Field("curve scale h must be positive".into()));
    }
    let field = QuasiradialField::new(prm, profile);
    let scale = (2.0 * prm.k).powf(-prm.k);
    let mut worst = 0.0f64;
    let mut fmax = 0.0f64;
    for &tau_curve in tau_grid {
        let (x, y, f_curve) = curve_point(prm, tau_curve, h);
        let r = x.hypot(y);
        if r < 1e-14 * h.powf(2.0 * prm.n_sym as f64 - 1.0) {
            continue; // point at the origin carries no information
        }
        let f_quasi = scale * field.eval_polar(r, y.atan2(x));
        worst = worst.max((f_curve - f_quasi).abs());
        fmax = fmax.max(f_curve.abs());
    }
    if fmax == 0.0 {
        return Err(Error::Field("curve sweep produced no usable points".into()));
    }
    Ok(worst / fmax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Branch;
    use crate::profile::profile_ode;
    use crate::tols;

    fn setup(p: f64, n: u32) -> (ProblemParams, AngularProfile) {
        let prm = ProblemParams::new(p, n, Branch::Larger).unwrap();
        let prof = profile_ode(&prm, 256, tols::ODE_TOL).unwrap();
        (prm, prof)
    }

    #[test]
    fn field_basics() {
        let (prm, prof) = setup(4.0, 2);
        let field = QuasiradialField::new(&prm, &prof);
        assert_eq!(field.eval_polar(0.0, 1.234), 0.0);
        assert!((field.eval_polar(1.0, 0.0) - 1.0).abs() < 1e-12);
        // Homogeneity f(s·r, θ) = s^k f(r, θ).
        let (r, theta, s) = (0.37, 1.1, 2.5);
        let lhs = field.eval_polar(s * r, theta);
        let rhs = s.powf(prm.k) * field.eval_polar(r, theta);
        assert!((lhs - rhs).abs() < 1e-12 * rhs.abs());
    }

    #[test]
    fn linear_field_residual_is_noise() {
        let f = |x: f64, _y: f64| x;
        let res = p_laplace_residual(&f, 4.0, &[0.02, 0.01]).unwrap();
        assert!(res.iter().all(|&r| r < 1e-9), "{res:?}");
    }

    #[test]
    fn radial_square_residual_matches_hand_calculus() {
        // f = r²: div(|∇f|^{p−2}∇f) = 2^{p−1}·p·r^{p−2}.
        let f = |x: f64, y: f64| x * x + y * y;
        for p in [3.0, 4.0, 5.5] {
            for r in [0.4, 0.7] {
                let got = p_laplace_residual_at(&f, p, r, 0.0, 1e-3);
                let want = 2f64.powf(p - 1.0) * p * r.powf(p - 2.0);
                assert!(
                    (got - want).abs() < 1e-4 * want,
                    "p={p}, r={r}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn quasiradial_residual_converges_at_second_order() {
        let (prm, prof) = setup(4.0, 3);
        let field = QuasiradialField::new(&prm, &prof);
        let f = |x: f64, y: f64| field.eval_xy(x, y);
        let spacings = [0.02, 0.01, 0.005, 0.0025];
        let res = p_laplace_residual(&f, prm.p, &spacings).unwrap();
        let order = observed_order(&spacings, &res);
        assert!(order >= 1.9, "observed order {order:.3}, residuals {res:?}");
    }

    #[test]
    fn rejects_stencils_reaching_the_origin() {
        let f = |x: f64, _y: f64| x;
        assert!(p_laplace_residual(&f, 4.0, &[0.2]).is_err());
    }

    #[test]
    fn curve_parametrization_matches_field() {
        let (prm, prof) = setup(4.0, 2);
        let tau_grid: Vec<f64> = (0..720)
            .map(|i| std::f64::consts::TAU * i as f64 / 720.0)
            .collect();
        for h in [0.6, 1.0, 1.3] {
            let mismatch = boundary_curve_check(&prm, &prof, &tau_grid, h).unwrap();
            assert!(mismatch < 1e-6, "h={h}: mismatch {mismatch:.3e}");
        }
    }

    #[test]
    fn curve_sign_follows_angular_factor() {
        let (prm, _) = setup(4.0, 2);
        let n = prm.n_sym as f64;
        for i in 0..360 {
            let tau_curve = std::f64::consts::TAU * i as f64 / 360.0;
            let (_, _, f) = curve_point(&prm, tau_curve, 0.8);
            let c = (n * tau_curve).cos();
            if c.abs() > 1e-3 {
                assert_eq!(f.signum(), c.signum());
            }
        }
    }
}
