//! Nonlinear p-Laplace Dirichlet solver on the unit disk.
//!
//! The discretization is a conservative finite-volume scheme on a polar
//! grid — spectral (FFT) angular derivatives, centered radial fluxes, a
//! single flux-balance unknown at the origin — and the nonlinear system
//! is solved by Jacobian-free Newton–Krylov: directional derivatives by
//! finite differences, preconditioned with an ILU factorization of the
//! frozen-weight (Picard) matrix, with an Armijo line search and a full
//! Picard sweep as fallback. The initial guess is the harmonic (`p = 2`)
//! solve of the same data.
//!
//! The module also hosts two continuum diagnostics: a finite-difference
//! p-Laplacian for arbitrary planar fields, and a probe for the
//! asymptotic mean-value expansion that mixes a ball average with the
//! boundary midrange.

use std::f64::consts::TAU;
use std::sync::Arc;

use rustfft::{num_complex::Complex, Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::exec;
use crate::solver::sparse::{
    bicgstab, norm2, ruiz_equilibrate, CooBuilder, CsrMatrix, FnOp, Ilu0,
};
use crate::tols;

/// Spectral differentiation of periodic samples on a full circle.
struct SpectralDiff {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl SpectralDiff {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        SpectralDiff {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    /// d/dθ of `n` uniform samples over `[0, 2π)`; the Nyquist mode is
    /// dropped, which is the symmetric choice for real data.
    fn deriv(&self, u: &[f64]) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(u.len(), n);
        let mut buf: Vec<Complex<f64>> = u.iter().map(|&x| Complex::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf[0] = Complex::new(0.0, 0.0);
        for (m, c) in buf.iter_mut().enumerate().skip(1) {
            let k = if 2 * m < n {
                m as f64
            } else if 2 * m == n {
                0.0
            } else {
                m as f64 - n as f64
            };
            *c *= Complex::new(0.0, k);
        }
        self.inv.process(&mut buf);
        buf.iter().map(|c| c.re / n as f64).collect()
    }
}

/// Solution on the polar grid: `rings[(l-1)·n_theta + i]` holds the value
/// at radius `l·h_r`, angle `i·2π/n_theta`, for `l = 1..=n_r`; the origin
/// carries its own value.
pub struct DiskSolution {
    pub n_r: usize,
    pub n_theta: usize,
    pub h_r: f64,
    pub center: f64,
    pub rings: Vec<f64>,
}

impl DiskSolution {
    pub fn value(&self, l: usize, i: usize) -> f64 {
        if l == 0 {
            self.center
        } else {
            self.rings[(l - 1) * self.n_theta + i % self.n_theta]
        }
    }

    /// Bilinear interpolation in `(r, θ)`; the innermost cell blends the
    /// origin value with the first ring.
    pub fn eval(&self, r: f64, theta: f64) -> f64 {
        let r = r.clamp(0.0, 1.0);
        let t = (r / self.h_r).min(self.n_r as f64 - 1e-12);
        let l = t.floor() as usize;
        let fr = t - l as f64;
        let h_t = TAU / self.n_theta as f64;
        let s = theta.rem_euclid(TAU) / h_t;
        let i = (s.floor() as usize) % self.n_theta;
        let ft = s - s.floor();
        let at = |l: usize| -> f64 {
            (1.0 - ft) * self.value(l, i) + ft * self.value(l, i + 1)
        };
        (1.0 - fr) * at(l) + fr * at(l + 1)
    }

    /// Relative L² distance to a reference `exact(r, θ)`, area-weighted.
    pub fn rel_l2_error(&self, exact: impl Fn(f64, f64) -> f64) -> f64 {
        let h_t = TAU / self.n_theta as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for l in 1..=self.n_r {
            let r = l as f64 * self.h_r;
            for i in 0..self.n_theta {
                let e = exact(r, i as f64 * h_t);
                let d = self.value(l, i) - e;
                num += d * d * r;
                den += e * e * r;
            }
        }
        (num / den.max(f64::MIN_POSITIVE)).sqrt()
    }
}

/// Newton iteration record.
#[derive(Clone, Debug)]
pub struct NewtonStats {
    pub iterations: usize,
    /// Final root-mean-square residual `‖F‖₂/√n`.
    pub residual_rms: f64,
    /// RMS residual after each accepted step, starting at the initial guess.
    pub history: Vec<f64>,
    pub picard_fallbacks: usize,
}

/// Polar-grid discretization of `div(|∇u|^{p-2}∇u)` with fixed boundary
/// samples; every residual entry scales like `h_r·r·div(w∇u)`.
struct Discretization {
    n_r: usize,
    n_theta: usize,
    h_r: f64,
    h_theta: f64,
    p: f64,
    g: Vec<f64>,
    diff: SpectralDiff,
}

impl Discretization {
    fn n_unknowns(&self) -> usize {
        (self.n_r - 1) * self.n_theta + 1
    }

    /// Values on ring `l`; `l = n_r` is the fixed boundary ring.
    fn ring<'x>(&'x self, x: &'x [f64], l: usize) -> &'x [f64] {
        if l == self.n_r {
            &self.g
        } else {
            &x[(l - 1) * self.n_theta..l * self.n_theta]
        }
    }

    fn weight(&self, ur: f64, ut: f64) -> f64 {
        let q = ur * ur + ut * ut + tols::DELTA_REG * tols::DELTA_REG;
        q.powf(0.5 * (self.p - 2.0))
    }

    /// Angular derivative of every ring `1..=n_r`, index `l-1`.
    fn ring_derivs(&self, x: &[f64]) -> Vec<Vec<f64>> {
        exec::map_collect(self.n_r, |j| self.diff.deriv(self.ring(x, j + 1)))
    }

    /// Gradient-dependent weights: `fw[l][i]` on the face between rings
    /// `l` and `l+1` (`l = 0` is the origin face), `nw[l-1][i]` at the
    /// ring-`l` nodes.
    fn weights(&self, x: &[f64], du: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let nt = self.n_theta;
        let h = self.h_r;
        let uc = x[self.n_unknowns() - 1];
        let fw = exec::map_collect(self.n_r, |l| {
            let upper = self.ring(x, l + 1);
            let mut row = Vec::with_capacity(nt);
            if l == 0 {
                let r1 = h;
                for i in 0..nt {
                    let ur = (upper[i] - uc) / h;
                    let ut = du[0][i] / (2.0 * r1);
                    row.push(self.weight(ur, ut));
                }
            } else {
                let lower = self.ring(x, l);
                let (rl, ru) = (l as f64 * h, (l + 1) as f64 * h);
                for i in 0..nt {
                    let ur = (upper[i] - lower[i]) / h;
                    let ut = 0.5 * (du[l - 1][i] / rl + du[l][i] / ru);
                    row.push(self.weight(ur, ut));
                }
            }
            row
        });
        let nw = exec::map_collect(self.n_r - 1, |j| {
            let l = j + 1;
            let rl = l as f64 * h;
            let upper = self.ring(x, l + 1);
            let mut row = Vec::with_capacity(nt);
            for i in 0..nt {
                let below = if l == 1 { uc } else { self.ring(x, l - 1)[i] };
                let ur = (upper[i] - below) / (2.0 * h);
                let ut = du[l - 1][i] / rl;
                row.push(self.weight(ur, ut));
            }
            row
        });
        (fw, nw)
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let nt = self.n_theta;
        let h = self.h_r;
        let uc = x[self.n_unknowns() - 1];
        let du = self.ring_derivs(x);
        let (fw, nw) = self.weights(x, &du);
        let rows = exec::map_collect(self.n_r - 1, |j| {
            let l = j + 1;
            let rl = l as f64 * h;
            let here = self.ring(x, l);
            let upper = self.ring(x, l + 1);
            let flux: Vec<f64> = (0..nt).map(|i| nw[j][i] * du[j][i]).collect();
            let dflux = self.diff.deriv(&flux);
            let mut row = Vec::with_capacity(nt);
            for i in 0..nt {
                let below = if l == 1 { uc } else { self.ring(x, l - 1)[i] };
                let radial = ((rl + 0.5 * h) * fw[l][i] * (upper[i] - here[i])
                    - (rl - 0.5 * h) * fw[l - 1][i] * (here[i] - below))
                    / h;
                row.push(radial + h / rl * dflux[i]);
            }
            row
        });
        let mut out: Vec<f64> = rows.into_iter().flatten().collect();
        let first = self.ring(x, 1);
        out.push((0..nt).map(|i| fw[0][i] * (first[i] - uc)).sum());
        out
    }

    /// Frozen-weight linear system `A·x = b` with a three-point angular
    /// stencil in place of the spectral derivative; `A·x − b` matches the
    /// nonlinear residual up to the angular discretization swap.
    fn picard_system(&self, fw: &[Vec<f64>], nw: &[Vec<f64>]) -> (CsrMatrix, Vec<f64>) {
        let nt = self.n_theta;
        let h = self.h_r;
        let n = self.n_unknowns();
        let center_col = n - 1;
        let mut coo = CooBuilder::new(n, n);
        let mut b = vec![0.0; n];
        for l in 1..self.n_r {
            let rl = l as f64 * h;
            let c_ang = h / (rl * self.h_theta * self.h_theta);
            for i in 0..nt {
                let row = (l - 1) * nt + i;
                let ap = (rl + 0.5 * h) * fw[l][i] / h;
                let am = (rl - 0.5 * h) * fw[l - 1][i] / h;
                let wp = 0.5 * (nw[l - 1][i] + nw[l - 1][(i + 1) % nt]);
                let wm = 0.5 * (nw[l - 1][i] + nw[l - 1][(i + nt - 1) % nt]);
                coo.add(row, row, -(ap + am) - c_ang * (wp + wm));
                coo.add(row, (l - 1) * nt + (i + 1) % nt, c_ang * wp);
                coo.add(row, (l - 1) * nt + (i + nt - 1) % nt, c_ang * wm);
                if l + 1 < self.n_r {
                    coo.add(row, l * nt + i, ap);
                } else {
                    b[row] = -ap * self.g[i];
                }
                if l == 1 {
                    coo.add(row, center_col, am);
                } else {
                    coo.add(row, (l - 2) * nt + i, am);
                }
            }
        }
        let mut diag = 0.0;
        for i in 0..nt {
            coo.add(center_col, i, fw[0][i]);
            diag -= fw[0][i];
        }
        coo.add(center_col, center_col, diag);
        (coo.build(), b)
    }

    fn unit_weights(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        (
            vec![vec![1.0; self.n_theta]; self.n_r],
            vec![vec![1.0; self.n_theta]; self.n_r - 1],
        )
    }
}

fn rms(v: &[f64]) -> f64 {
    norm2(v) / (v.len() as f64).sqrt()
}

/// Equilibrated ILU-BiCGStab solve of an assembled sparse system.
fn lin_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let (aeq, row_scale, col_scale) = ruiz_equilibrate(a, 6);
    let beq: Vec<f64> = b.iter().zip(&row_scale).map(|(v, s)| v * s).collect();
    let ilu = Ilu0::factor(&aeq, 1e-10)?;
    let (z, _stats) = bicgstab(&aeq, Some(&ilu), &beq, tols::LINEAR_RESIDUAL, 6000)?;
    Ok(z.iter().zip(&col_scale).map(|(v, s)| v * s).collect())
}

/// Solve `div(|∇u|^{p-2}∇u) = 0` on the unit disk with Dirichlet data
/// `g(θ)` on a `n_r × n_theta` polar grid. `tol` is the RMS residual
/// target for the discrete nonlinear system.
pub fn solve_p_laplace_dirichlet(
    p: f64,
    g: &(dyn Fn(f64) -> f64 + Sync),
    n_r: usize,
    n_theta: usize,
    tol: f64,
) -> Result<(DiskSolution, NewtonStats)> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::Params(format!("p = {p} is outside [2, ∞)")));
    }
    if n_r < 4 || n_theta < 8 {
        return Err(Error::Params(format!(
            "grid {n_r}×{n_theta} is too coarse for the polar scheme"
        )));
    }
    let h_theta = TAU / n_theta as f64;
    let disc = Discretization {
        n_r,
        n_theta,
        h_r: 1.0 / n_r as f64,
        h_theta,
        p,
        g: (0..n_theta).map(|i| g(i as f64 * h_theta)).collect(),
        diff: SpectralDiff::new(n_theta),
    };
    let n = disc.n_unknowns();

    // Harmonic initial guess: the same scheme with unit weights.
    let (fw1, nw1) = disc.unit_weights();
    let (a0, b0) = disc.picard_system(&fw1, &nw1);
    let mut u = lin_solve(&a0, &b0)?;

    let mut f = disc.residual(&u);
    let mut res = rms(&f);
    let mut history = vec![res];
    let mut fallbacks = 0usize;
    let mut iterations = 0usize;

    for _ in 0..60 {
        if res <= tol {
            break;
        }
        iterations += 1;
        let du = disc.ring_derivs(&u);
        let (fw, nw) = disc.weights(&u, &du);
        let (pa, pb) = disc.picard_system(&fw, &nw);

        // Newton step: matrix-free Jacobian, Picard-ILU preconditioner,
        // both in the equilibrated scaling of the Picard matrix.
        let (paeq, row_scale, col_scale) = ruiz_equilibrate(&pa, 6);
        let step = Ilu0::factor(&paeq, 1e-10).ok().and_then(|ilu| {
            let u_norm = norm2(&u);
            let jv = |v: &[f64]| -> Vec<f64> {
                let vs: Vec<f64> = v.iter().zip(&col_scale).map(|(x, s)| x * s).collect();
                let vn = norm2(&vs);
                if vn == 0.0 {
                    return vec![0.0; n];
                }
                let eps = 1e-7 * (1.0 + u_norm) / vn;
                let pert: Vec<f64> = u.iter().zip(&vs).map(|(a, b)| a + eps * b).collect();
                let fp = disc.residual(&pert);
                fp.iter()
                    .zip(&f)
                    .zip(&row_scale)
                    .map(|((a, b), s)| (a - b) / eps * s)
                    .collect()
            };
            let op = FnOp { n, f: &jv };
            let rhs: Vec<f64> = f.iter().zip(&row_scale).map(|(v, s)| -v * s).collect();
            bicgstab(&op, Some(&ilu), &rhs, 1e-4, 400)
                .ok()
                .map(|(z, _)| -> Vec<f64> {
                    z.iter().zip(&col_scale).map(|(x, s)| x * s).collect()
                })
        });

        let mut accepted = false;
        if let Some(dx) = step {
            let mut lambda = 1.0;
            for _ in 0..=8 {
                let trial: Vec<f64> =
                    u.iter().zip(&dx).map(|(a, d)| a + lambda * d).collect();
                let ft = disc.residual(&trial);
                let rt = rms(&ft);
                if rt <= (1.0 - 1e-4 * lambda) * res {
                    u = trial;
                    f = ft;
                    res = rt;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
        }
        if !accepted {
            // Picard fallback: solve the frozen-weight system outright.
            let x = lin_solve(&pa, &pb)?;
            let ft = disc.residual(&x);
            let rt = rms(&ft);
            if rt >= res * (1.0 - 1e-9) {
                return Err(Error::Nonlinear(format!(
                    "iteration stalled at RMS residual {res:.3e}; step history {history:?}"
                )));
            }
            u = x;
            f = ft;
            res = rt;
            fallbacks += 1;
        }
        history.push(res);
    }
    if res > tol {
        return Err(Error::Nonlinear(format!(
            "RMS residual {res:.3e} above target {tol:.1e} after {iterations} steps; history {history:?}"
        )));
    }

    let mut rings = u[..(n_r - 1) * n_theta].to_vec();
    rings.extend_from_slice(&disc.g);
    let solution = DiskSolution {
        n_r,
        n_theta,
        h_r: disc.h_r,
        center: u[n - 1],
        rings,
    };
    let stats = NewtonStats {
        iterations,
        residual_rms: res,
        history,
        picard_fallbacks: fallbacks,
    };
    Ok((solution, stats))
}

/// `div(|∇u|^{p-2}∇u)` of a planar field by second-order central
/// differences with step `h`; requires a nonvanishing gradient for a
/// meaningful value when `p < 4`.
pub fn p_laplacian_fd(u: &dyn Fn(f64, f64) -> f64, p: f64, x: f64, y: f64, h: f64) -> f64 {
    let ux = (u(x + h, y) - u(x - h, y)) / (2.0 * h);
    let uy = (u(x, y + h) - u(x, y - h)) / (2.0 * h);
    let uxx = (u(x + h, y) - 2.0 * u(x, y) + u(x - h, y)) / (h * h);
    let uyy = (u(x, y + h) - 2.0 * u(x, y) + u(x, y - h)) / (h * h);
    let uxy = (u(x + h, y + h) - u(x + h, y - h) - u(x - h, y + h) + u(x - h, y - h))
        / (4.0 * h * h);
    let g2 = ux * ux + uy * uy;
    let lap = uxx + uyy;
    let second = ux * ux * uxx + 2.0 * ux * uy * uxy + uy * uy * uyy;
    g2.powf(0.5 * (p - 4.0)) * (g2 * lap + (p - 2.0) * second)
}

/// Asymptotic mean-value probe at one point.
pub struct AmvReport {
    pub radii: Vec<f64>,
    /// `u(x₀) − [α·(ball mean) + (1−α)·(boundary midrange)]` per radius.
    pub remainders: Vec<f64>,
    /// Ball-average coefficient `α = 4/(p+2)` used for the splits.
    pub alpha: f64,
    /// Log-log slope of `|remainder|` against the radius.
    pub fitted_order: f64,
    /// True when the slope exceeds 2 or the remainders sit at quadrature
    /// noise level — either way the quadratic term has cancelled.
    pub pass: bool,
}

fn circle_extreme(samples: &[f64], maximize: bool) -> f64 {
    let n = samples.len();
    let pick = |a: f64, b: f64| if maximize { a > b } else { a < b };
    let mut j = 0;
    for (i, &v) in samples.iter().enumerate() {
        if pick(v, samples[j]) {
            j = i;
        }
    }
    let (vm, v0, vp) = (samples[(j + n - 1) % n], samples[j], samples[(j + 1) % n]);
    let a2 = 0.5 * (vp - 2.0 * v0 + vm);
    let a1 = 0.5 * (vp - vm);
    if a2.abs() < 1e-300 {
        return v0;
    }
    let d = (-a1 / (2.0 * a2)).clamp(-1.0, 1.0);
    v0 + a1 * d + a2 * d * d
}

/// Compare `u(x₀)` with the p-weighted mix of ball average and boundary
/// midrange over a sweep of radii and fit the decay order of the
/// remainder. All radii must keep the ball inside the unit disk.
pub fn amv_probe(
    u: &(dyn Fn(f64, f64) -> f64 + Sync),
    p: f64,
    x0: (f64, f64),
    radii: &[f64],
) -> Result<AmvReport> {
    if radii.is_empty() {
        return Err(Error::Params("no probe radii given".into()));
    }
    let rho_max = radii.iter().cloned().fold(0.0f64, f64::max);
    let dist = (x0.0 * x0.0 + x0.1 * x0.1).sqrt();
    if dist + rho_max >= 1.0 {
        return Err(Error::Params(format!(
            "probe ball of radius {rho_max} around ({}, {}) leaves the unit disk",
            x0.0, x0.1
        )));
    }
    if !(p >= 2.0) {
        return Err(Error::Params(format!("p = {p} is outside [2, ∞)")));
    }
    let alpha = 4.0 / (p + 2.0);
    let center = u(x0.0, x0.1);
    let n_ang = 256usize;
    let n_rad = 64usize;
    let n_mid = 4096usize;
    let mut remainders = Vec::with_capacity(radii.len());
    let mut scale = center.abs();
    for &rho in radii {
        // Ball average: Simpson in the radius, trapezoid in the angle.
        let ring_means: Vec<f64> = exec::map_collect(n_rad + 1, |k| {
            let s = rho * k as f64 / n_rad as f64;
            let mean = (0..n_ang)
                .map(|j| {
                    let phi = TAU * j as f64 / n_ang as f64;
                    u(x0.0 + s * phi.cos(), x0.1 + s * phi.sin())
                })
                .sum::<f64>()
                / n_ang as f64;
            mean * s
        });
        let hs = rho / n_rad as f64;
        let mut integral = ring_means[0] + ring_means[n_rad];
        for (k, &v) in ring_means.iter().enumerate().skip(1).take(n_rad - 1) {
            integral += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        integral *= hs / 3.0 * TAU;
        let ball_mean = integral / (std::f64::consts::PI * rho * rho);

        let boundary: Vec<f64> = exec::map_collect(n_mid, |j| {
            let phi = TAU * j as f64 / n_mid as f64;
            u(x0.0 + rho * phi.cos(), x0.1 + rho * phi.sin())
        });
        let hi = circle_extreme(&boundary, true);
        let lo = circle_extreme(&boundary, false);
        scale = scale.max(hi.abs()).max(lo.abs());
        let midrange = 0.5 * (hi + lo);
        remainders.push(center - (alpha * ball_mean + (1.0 - alpha) * midrange));
    }
    let floor = 1e-8 * scale.max(f64::MIN_POSITIVE);
    let at_noise = remainders.iter().all(|r| r.abs() < floor);
    let fitted_order = if at_noise {
        f64::INFINITY
    } else {
        let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let ys: Vec<f64> = remainders
            .iter()
            .map(|r| r.abs().max(f64::MIN_POSITIVE).ln())
            .collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        sxy / sxx
    };
    let pass = at_noise || fitted_order > 2.0;
    Ok(AmvReport {
        radii: radii.to_vec(),
        remainders,
        alpha,
        fitted_order,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::QuasiradialField;
    use crate::params::{Branch, ProblemParams};
    use crate::profile::profile_ode;
    use crate::weighted::{operator_apply, DiskC2Field};

    #[test]
    fn spectral_derivative_is_exact_on_low_modes() {
        let d = SpectralDiff::new(24);
        let u: Vec<f64> = (0..24)
            .map(|i| {
                let t = TAU * i as f64 / 24.0;
                (3.0 * t).cos() + 0.5 * (5.0 * t).sin()
            })
            .collect();
        let du = d.deriv(&u);
        for (i, &v) in du.iter().enumerate() {
            let t = TAU * i as f64 / 24.0;
            let exact = -3.0 * (3.0 * t).sin() + 2.5 * (5.0 * t).cos();
            assert!((v - exact).abs() < 1e-12, "node {i}: {v} vs {exact}");
        }
    }

    #[test]
    fn harmonic_data_is_reproduced_at_p_equal_two() {
        let g = |t: f64| (2.0 * t).cos();
        let (sol, stats) =
            solve_p_laplace_dirichlet(2.0, &g, 48, 64, tols::NEWTON_TOL).unwrap();
        let mut worst = 0.0f64;
        for l in 0..=sol.n_r {
            let r = l as f64 * sol.h_r;
            for i in 0..sol.n_theta {
                let t = TAU * i as f64 / sol.n_theta as f64;
                worst = worst.max((sol.value(l, i) - r * r * (2.0 * t).cos()).abs());
            }
        }
        assert!(worst < 1e-6, "worst nodal error {worst:.3e}");
        assert!(stats.residual_rms <= tols::NEWTON_TOL);
    }

    #[test]
    fn constant_data_gives_the_constant_solution() {
        let g = |_: f64| 0.7;
        let (sol, _) = solve_p_laplace_dirichlet(3.5, &g, 16, 24, tols::NEWTON_TOL).unwrap();
        assert!((sol.center - 0.7).abs() < 1e-6);
        for &v in &sol.rings {
            assert!((v - 0.7).abs() < 1e-6);
        }
    }

    #[test]
    fn quasiradial_data_recovers_the_quasiradial_field() {
        let prm = ProblemParams::new(4.0, 2, Branch::Larger).unwrap();
        let profile = profile_ode(&prm, 256, tols::ODE_TOL).unwrap();
        let g = |t: f64| profile.eval(t);
        let (sol, stats) =
            solve_p_laplace_dirichlet(prm.p, &g, 64, 96, tols::NEWTON_TOL).unwrap();
        let err = sol.rel_l2_error(|r, t| r.powf(prm.k) * profile.eval(t));
        assert!(err < 0.02, "relative L² error {err:.3e}");
        assert!(stats.residual_rms <= tols::NEWTON_TOL);
        assert!(!stats.history.is_empty());
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = |_: f64| 0.0;
        assert!(solve_p_laplace_dirichlet(1.5, &g, 16, 24, 1e-9).is_err());
        assert!(solve_p_laplace_dirichlet(3.0, &g, 2, 24, 1e-9).is_err());
    }

    #[test]
    fn newton_linearization_matches_the_frozen_coefficient_operator() {
        // The directional derivative of the p-Laplacian at the quasiradial
        // field, taken by finite differences in both space and the
        // perturbation size, must reproduce the divergence-form operator
        // with the frozen coefficient matrix.
        let prm = ProblemParams::new(4.0, 3, Branch::Larger).unwrap();
        let profile = profile_ode(&prm, 256, tols::ODE_TOL).unwrap();
        let base = QuasiradialField::new(&prm, &profile);
        let n = prm.n_sym as f64;
        // Perturbation smooth in the plane: (r² + r³cos 3θ)-type fields.
        let w_val = move |r: f64, t: f64| (r * r + r * r * r) * (n * t).cos();
        let w_grad = move |r: f64, t: f64| {
            (
                (2.0 * r + 3.0 * r * r) * (n * t).cos(),
                -(r * r + r * r * r) * n * (n * t).sin(),
            )
        };
        let w_hess = move |r: f64, t: f64| {
            (
                (2.0 + 6.0 * r) * (n * t).cos(),
                -(2.0 * r + 3.0 * r * r) * n * (n * t).sin(),
                -(r * r + r * r * r) * n * n * (n * t).cos(),
            )
        };
        let w = DiskC2Field {
            value: &w_val,
            grad: &w_grad,
            hess: &w_hess,
        };
        let eps = 1e-3;
        let h = 1e-3;
        for &(r, t) in &[(0.55f64, 0.3f64), (0.75, 1.1), (0.85, 2.3)] {
            let (x, y) = (r * t.cos(), r * t.sin());
            let plus = |xx: f64, yy: f64| {
                let rr = (xx * xx + yy * yy).sqrt();
                let tt = yy.atan2(xx);
                base.eval_xy(xx, yy) + eps * w_val(rr, tt)
            };
            let minus = |xx: f64, yy: f64| {
                let rr = (xx * xx + yy * yy).sqrt();
                let tt = yy.atan2(xx);
                base.eval_xy(xx, yy) - eps * w_val(rr, tt)
            };
            let lhs = (p_laplacian_fd(&plus, prm.p, x, y, h)
                - p_laplacian_fd(&minus, prm.p, x, y, h))
                / (2.0 * eps);
            let rhs = operator_apply(&prm, &profile, false, &w, r, t).unwrap();
            let scale = lhs.abs().max(rhs.abs()).max(1e-300);
            assert!(
                (lhs - rhs).abs() / scale < 1e-2,
                "at (r, θ) = ({r}, {t}): {lhs:.6e} vs {rhs:.6e}"
            );
        }
    }

    #[test]
    fn mean_value_remainder_sits_at_noise_level_for_harmonic_fields() {
        // At p = 2 the midrange coefficient vanishes and the ball average
        // of a harmonic function is exact.
        let u = |x: f64, y: f64| x * x - y * y + 0.5 * x;
        let report = amv_probe(&u, 2.0, (0.3, 0.1), &[0.1, 0.15, 0.2]).unwrap();
        assert!(report.pass);
        for &r in &report.remainders {
            assert!(r.abs() < 1e-8, "remainder {r:.3e}");
        }
    }

    #[test]
    fn mean_value_remainder_decays_faster_than_quadratically() {
        let prm = ProblemParams::new(4.0, 2, Branch::Larger).unwrap();
        let profile = profile_ode(&prm, 256, tols::ODE_TOL).unwrap();
        let base = QuasiradialField::new(&prm, &profile);
        let u = move |x: f64, y: f64| base.eval_xy(x, y);
        let report =
            amv_probe(&u, prm.p, (0.45, 0.15), &[0.06, 0.09, 0.13, 0.2]).unwrap();
        assert!(
            report.pass,
            "fitted order {} with remainders {:?}",
            report.fitted_order, report.remainders
        );
    }

    #[test]
    fn probe_rejects_balls_leaving_the_disk() {
        let u = |x: f64, _: f64| x;
        assert!(amv_probe(&u, 2.0, (0.8, 0.0), &[0.3]).is_err());
        assert!(amv_probe(&u, 2.0, (0.0, 0.0), &[]).is_err());
    }
}
