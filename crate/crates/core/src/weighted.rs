//! Weighted norms, energy bookkeeping between the disk and strip charts,
//! and spectral checks of the variational structure.
//!
//! The solution space pairs a weighted L² norm (weight `r^{2β}` on the
//! disk) with a weighted gradient seminorm (weight `r^{2α}`, where
//! `2α = (p−2)(k−1)` matches the radial growth of the coefficient field).
//! Under `y = −ln r` these become exponential weights on the half strip;
//! every exponent conversion in this module is covered by a check that
//! integrates the same quantity independently in both charts.
//!
//! The Dirichlet form here is the continuum counterpart of the assembled
//! operators in [`crate::solver::assemble`]: quadrature versions of the
//! form, the expanded strong operator, and the boundary pairing validate
//! one another through the integration-by-parts identity.

use faer::{Mat, Side};

use crate::coeffs::{cutoff, cutoff_deriv, boundary_q_tau, BoundaryFns, CoefficientField};
use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::profile::{angular_potential, AngularProfile};
use crate::quadrature::{DiskQuadrature, StripQuadrature};
use crate::report::CheckReport;
use crate::solver::assemble::{assemble_operator, gram_matrices, AssemblyMode};
use crate::solver::sparse::{norm2, orthonormalize, ruiz_equilibrate, CsrMatrix};
use crate::solver::strip::StripGrid;
use crate::tols;

/// A field on the disk chart `(r, θ)` with raw partial derivatives.
pub struct DiskField<'f> {
    pub value: &'f (dyn Fn(f64, f64) -> f64 + Sync),
    /// `(∂_r u, ∂_θ u)` — raw partials, not frame components.
    pub grad: &'f (dyn Fn(f64, f64) -> (f64, f64) + Sync),
}

/// A twice-differentiable field on the disk chart.
pub struct DiskC2Field<'f> {
    pub value: &'f (dyn Fn(f64, f64) -> f64 + Sync),
    pub grad: &'f (dyn Fn(f64, f64) -> (f64, f64) + Sync),
    /// `(∂_rr u, ∂_rθ u, ∂_θθ u)`.
    pub hess: &'f (dyn Fn(f64, f64) -> (f64, f64, f64) + Sync),
}

impl<'f> DiskC2Field<'f> {
    pub fn first_order(&self) -> DiskField<'_> {
        DiskField {
            value: self.value,
            grad: self.grad,
        }
    }
}

/// Weighted `(Y0, Y1)` norms of a field:
/// `‖f‖_{Y0}² = ∫ f² r^{2β} dA` and
/// `‖f‖_{Y1}² = ‖f‖_{Y0}² + ∫ |∇°f|² r^{2α} dA`
/// with the frame gradient `∇°f = (∂_r f, ∂_θ f/r)`.
///
/// Requires `k > 1` (so the weights decay toward the puncture) and β
/// inside the admissible window.
pub fn weighted_norms(
    field: &DiskField,
    prm: &ProblemParams,
    rule: &DiskQuadrature,
) -> Result<(f64, f64)> {
    if !(prm.k > 1.0) {
        return Err(Error::Params(format!(
            "weighted norms need a super-linear growth exponent, got k = {}",
            prm.k
        )));
    }
    if !prm.beta_admissible() {
        return Err(Error::Params(format!(
            "β = {} lies outside the admissible window {:?}",
            prm.beta,
            prm.beta_window()
        )));
    }
    let y0_sq = rule.integrate(|r, theta| {
        let v = (field.value)(r, theta);
        v * v * r.powf(2.0 * prm.beta)
    });
    let grad_sq = rule.integrate(|r, theta| {
        let (ur, ut) = (field.grad)(r, theta);
        let et = ut / r;
        (ur * ur + et * et) * r.powf(2.0 * prm.alpha_space)
    });
    Ok((y0_sq.sqrt(), (y0_sq + grad_sq).sqrt()))
}

/// Verify the chart-change bookkeeping for the scalar energy density
/// `c(θ)|∇°v|²` with `c = (a_θ² + k²a²)^{(p−2)/2}`:
///
/// * disk chart: `∫ c(θ)|∇°v|² r^{2α_space} dA`,
/// * strip chart: `∫ c(x) F² e^{−2·α_strip·y} dy dx` with `F` the frame
///   gradient norm at `r = e^{−y}` and `α_strip = α_space + 1`.
///
/// The two are the same integral written in different variables, so two
/// independent quadratures must agree. The full matrix energy
/// `∫⟨A∇°v,∇°v⟩dA` is additionally pinched between the scalar energy and
/// `(p−1)` times it.
pub fn strip_energy_check(
    field: &DiskField,
    prm: &ProblemParams,
    profile: &AngularProfile,
    rule: &DiskQuadrature,
) -> CheckReport {
    let mut report = CheckReport::new("strip_energy_check");
    let (p, k) = (prm.p, prm.k);
    let scalar_c = |theta: f64| {
        let (a, s) = profile.eval_pair(theta);
        (s * s + k * k * a * a).powf((p - 2.0) / 2.0)
    };
    let frame_sq = |r: f64, theta: f64| {
        let (ur, ut) = (field.grad)(r, theta);
        let et = ut / r;
        ur * ur + et * et
    };

    let disk_energy = rule.integrate(|r, theta| {
        scalar_c(theta) * frame_sq(r, theta) * r.powf(2.0 * prm.alpha_space)
    });

    let y_max = -rule.nodes_r[0].ln();
    let breaks: Vec<f64> = [2.0f64.ln(), -(0.02f64.ln())]
        .into_iter()
        .filter(|&b| b > 0.0 && b < y_max)
        .collect();
    let strip_energy = match StripQuadrature::new(y_max, &breaks, 256, 64) {
        Ok(strip) => strip.integrate(|x, y| {
            let r = (-y).exp();
            scalar_c(x) * frame_sq(r, x) * (-2.0 * prm.alpha_strip * y).exp()
        }),
        Err(e) => {
            return report
                .note(format!("strip quadrature failed: {e}"))
                .require(false, "strip quadrature construction");
        }
    };

    let scale = disk_energy.abs().max(strip_energy.abs()).max(1e-300);
    let defect = (disk_energy - strip_energy).abs() / scale;
    report = report
        .metric("disk_energy", disk_energy)
        .metric("strip_energy", strip_energy)
        .metric("relative_defect", defect)
        .metric("alpha_strip_minus_alpha_space", prm.alpha_strip - prm.alpha_space)
        .require(
            defect < tols::ENERGY_AGREEMENT,
            "disk and strip energies disagree",
        );

    let coeff = CoefficientField::new(prm, profile);
    let matrix_energy = rule.integrate(|r, theta| {
        let m = coeff.angular_matrix(theta);
        let (ur, ut) = (field.grad)(r, theta);
        let g = [ur, ut / r];
        let quad = g[0] * (m[0][0] * g[0] + m[0][1] * g[1])
            + g[1] * (m[1][0] * g[0] + m[1][1] * g[1]);
        quad * r.powf(2.0 * prm.alpha_space)
    });
    let lower = matrix_energy / disk_energy;
    report
        .metric("matrix_energy", matrix_energy)
        .metric("matrix_over_scalar", lower)
        .require(
            lower >= 1.0 - 1e-9 && lower <= (p - 1.0) + 1e-9,
            "matrix energy escapes the eigenvalue sandwich",
        )
}

/// The Dirichlet form
/// `D(v,u) = ∫⟨∇°v, B∇°u⟩ dA + ∫ v[e_θ(c)e_r(u) − e_r(c)e_θ(u)] dA`
/// with `B = A + C`, `C = [[0,−c],[c,0]]`, `c = −τ(θ)η(r)`. With
/// `with_skew = false` this is the symmetric energy pairing of `A` alone.
pub fn dirichlet_form(
    v: &DiskField,
    u: &DiskField,
    prm: &ProblemParams,
    profile: &AngularProfile,
    rule: &DiskQuadrature,
    with_skew: bool,
) -> f64 {
    let coeff = CoefficientField::new(prm, profile);
    let fns = BoundaryFns::new(prm, profile);
    rule.integrate(|r, theta| {
        let pow_r = r.powf(2.0 * prm.alpha_space);
        let m = coeff.angular_matrix(theta);
        let (ur, ut) = (u.grad)(r, theta);
        let (vr, vt) = (v.grad)(r, theta);
        let gu = [ur, ut / r];
        let gv = [vr, vt / r];
        let mut val = pow_r
            * (gv[0] * (m[0][0] * gu[0] + m[0][1] * gu[1])
                + gv[1] * (m[1][0] * gu[0] + m[1][1] * gu[1]));
        if with_skew {
            let eta = cutoff(r);
            let tau = fns.tau(theta);
            // ⟨∇°v, C∇°u⟩ = c(e_r(u)e_θ(v) − e_θ(u)e_r(v)).
            let c = -tau * eta;
            val += c * (gu[0] * gv[1] - gu[1] * gv[0]);
            // Drift: v[e_θ(c)e_r(u) − e_r(c)e_θ(u)].
            let c_r = -tau * cutoff_deriv(r);
            let c_t = -fns.tau_prime(theta) * eta;
            val += (v.value)(r, theta) * ((c_t / r) * gu[0] - c_r * gu[1]);
        }
        val
    })
}

/// θ-derivatives `(M00′, M01′, M11′)` of the angular coefficient matrix,
/// evaluated through the profile equation rather than differencing.
fn angular_matrix_theta(prm: &ProblemParams, profile: &AngularProfile, theta: f64) -> [f64; 3] {
    let (p, k) = (prm.p, prm.k);
    let (a, s) = profile.eval_pair(theta);
    let vv = angular_potential(p, k, a, s);
    let big_s = s * s + k * k * a * a;
    let b = s * s + (p - 1.0) * k * k * a * a;
    let w = (p - 1.0) * s * s + k * k * a * a;
    let s_t = 2.0 * a * s * (k * k - vv);
    let b_t = 2.0 * a * s * ((p - 1.0) * k * k - vv);
    let w_t = 2.0 * a * s * (k * k - (p - 1.0) * vv);
    let as_t = s * s - vv * a * a;
    let outer = big_s.powf((p - 6.0) / 2.0);
    let half = (p - 4.0) / 2.0;
    [
        outer * (half * s_t * b + big_s * b_t),
        (p - 2.0) * k * outer * (half * s_t * (a * s) + big_s * as_t),
        outer * (half * s_t * w + big_s * w_t),
    ]
}

/// The expanded strong operator at a point:
/// `T u = r^{2α}[M00 u_rr + 2M01 u_rθ/r + M11 u_θθ/r²
///        + ((2α+1)M00 + M01′) u_r/r + (2α M01 + M11′) u_θ/r²]`,
/// plus the first-order skew part `−τ′η·u_r/r + τη′·u_θ/r` when enabled.
pub fn operator_apply(
    prm: &ProblemParams,
    profile: &AngularProfile,
    with_skew: bool,
    field: &DiskC2Field,
    r: f64,
    theta: f64,
) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Field(format!("operator undefined at r = {r}")));
    }
    let coeff = CoefficientField::new(prm, profile);
    let m = coeff.angular_matrix(theta);
    let [_, m01p, m11p] = angular_matrix_theta(prm, profile, theta);
    let two_alpha = 2.0 * prm.alpha_space;
    let (ur, ut) = (field.grad)(r, theta);
    let (urr, urt, utt) = (field.hess)(r, theta);
    let mut val = r.powf(two_alpha)
        * (m[0][0] * urr
            + 2.0 * m[0][1] * urt / r
            + m[1][1] * utt / (r * r)
            + ((two_alpha + 1.0) * m[0][0] + m01p) * ur / r
            + (two_alpha * m[0][1] + m11p) * ut / (r * r));
    if with_skew {
        let fns = BoundaryFns::new(prm, profile);
        val += -fns.tau_prime(theta) * cutoff(r) * ur / r
            + fns.tau(theta) * cutoff_deriv(r) * ut / r;
    }
    Ok(val)
}

/// Integration-by-parts identity
/// `D(v,u) = −∫ v·T_A u dA + ∮_{r=1} v[(A∇°u)·e_r + τ ∂_θ u] dθ`
/// checked on closed-form fields over a radial refinement sweep; the
/// defect must shrink at second order or better.
pub fn boundary_identity_check(
    prm: &ProblemParams,
    profile: &AngularProfile,
    panel_sizes: &[usize],
) -> Result<CheckReport> {
    let mut report = CheckReport::new("boundary_identity_check");
    let n = prm.n_sym as f64;
    let u_value = move |r: f64, t: f64| r.powi(3) * (n * t).cos() + r * r;
    let u_grad = move |r: f64, t: f64| {
        (
            3.0 * r * r * (n * t).cos() + 2.0 * r,
            -n * r.powi(3) * (n * t).sin(),
        )
    };
    let u_hess = move |r: f64, t: f64| {
        (
            6.0 * r * (n * t).cos() + 2.0,
            -3.0 * n * r * r * (n * t).sin(),
            -n * n * r.powi(3) * (n * t).cos(),
        )
    };
    let u = DiskC2Field {
        value: &u_value,
        grad: &u_grad,
        hess: &u_hess,
    };
    let v_value = move |r: f64, t: f64| (r * r + r.powi(4)) * (n * t).sin() + 1.0;
    let v_grad = move |r: f64, t: f64| {
        (
            (2.0 * r + 4.0 * r.powi(3)) * (n * t).sin(),
            n * (r * r + r.powi(4)) * (n * t).cos(),
        )
    };
    let v = DiskField {
        value: &v_value,
        grad: &v_grad,
    };

    let coeff = CoefficientField::new(prm, profile);
    let fns = BoundaryFns::new(prm, profile);
    let mut defects = Vec::new();
    let mut spacings = Vec::new();
    let mut scale = 1.0f64;
    for (level, &panels) in panel_sizes.iter().enumerate() {
        let rule = DiskQuadrature::unit_disk(panels, 128)?;
        let form = dirichlet_form(&v, &u.first_order(), prm, profile, &rule, true);
        let volume = rule.integrate(|r, theta| {
            (v.value)(r, theta) * operator_apply(prm, profile, false, &u, r, theta).unwrap_or(0.0)
        });
        let boundary: f64 = rule
            .nodes_theta
            .iter()
            .map(|&theta| {
                let m = coeff.angular_matrix(theta);
                let (ur, ut) = (u.grad)(1.0, theta);
                let flux = m[0][0] * ur + m[0][1] * ut + fns.tau(theta) * ut;
                rule.weight_theta * (v.value)(1.0, theta) * flux
            })
            .sum();
        let defect = (form + volume - boundary).abs();
        scale = form.abs().max(boundary.abs()).max(1.0);
        report = report.metric(format!("defect_level_{level}"), defect);
        defects.push(defect);
        spacings.push(1.0 / panels as f64);
    }
    let order = crate::field::observed_order(&spacings, &defects);
    let floored = defects.last().unwrap() / scale < 1e-11;
    Ok(report
        .metric("observed_order", order)
        .metric("final_relative_defect", defects.last().unwrap() / scale)
        .require(
            order >= 2.0 || floored,
            "integration-by-parts defect does not shrink at second order",
        ))
}

fn to_dense_mat(m: &CsrMatrix) -> Mat<f64> {
    let d = m.to_dense();
    Mat::from_fn(m.n_rows, m.n_cols, |i, j| d[i * m.n_cols + j])
}

/// Search for a Gårding-type bound: the symmetric part of the form plus
/// `C2·G0` must dominate `C1·G1` on the complement of constants. Scans the
/// supplied `C2` values in ascending order and reports the first success
/// with its `C1` (the smallest reduced generalized eigenvalue).
pub fn coercivity_check(
    grid: &StripGrid,
    prm: &ProblemParams,
    profile: &AngularProfile,
    c2_scan: &[f64],
    with_skew: bool,
) -> Result<CheckReport> {
    let mut report = CheckReport::new("coercivity_check");
    let mode = if with_skew {
        AssemblyMode::SkewForm
    } else {
        AssemblyMode::SymmetricOnly
    };
    let sys = assemble_operator(grid, prm, profile, mode)?;
    let (g0, g1) = gram_matrices(grid, prm);
    let nd = grid.n_dof();

    let a = to_dense_mat(&sys.matrix);
    let d_sym = Mat::from_fn(nd, nd, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let g0m = to_dense_mat(&g0);
    let g1m = to_dense_mat(&g1);

    // G1 = QΛQᵀ → R = G1^{−1/2}; the generalized problem becomes the
    // ordinary eigenproblem for B = R X R.
    let eig = g1m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Dense(format!("G1 eigendecomposition failed: {e:?}")))?;
    let lam = eig.S();
    let lam_min = (0..nd).map(|i| lam[i]).fold(f64::INFINITY, f64::min);
    if !(lam_min > 0.0) {
        return Err(Error::Dense(format!(
            "G1 is not positive definite (λ_min = {lam_min:.3e})"
        )));
    }
    let q = eig.U();
    let r_half = Mat::from_fn(nd, nd, |i, j| q[(i, j)] * lam[j].powf(-0.5)) * q.transpose();
    let b_d = &r_half * &d_sym * &r_half;
    let b_g = &r_half * &g0m * &r_half;

    // Constants direction in reduced coordinates: v0 = G1^{1/2}·1.
    let sqrt_g1 = Mat::from_fn(nd, nd, |i, j| q[(i, j)] * lam[j].sqrt()) * q.transpose();
    let mut v0: Vec<f64> = (0..nd)
        .map(|i| (0..nd).map(|j| sqrt_g1[(i, j)]).sum())
        .collect();
    let v0_norm = norm2(&v0);
    v0.iter_mut().for_each(|x| *x /= v0_norm);
    // Householder H = I − 2hhᵀ with Hv0 = ±e₁; columns 2.. of H span v0⊥.
    let sign = if v0[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut h = v0.clone();
    h[0] += sign;
    let h_norm = norm2(&h);
    h.iter_mut().for_each(|x| *x /= h_norm);

    let mut found: Option<(f64, f64)> = None;
    for (idx, &c2) in c2_scan.iter().enumerate() {
        let b = Mat::from_fn(nd, nd, |i, j| b_d[(i, j)] + c2 * b_g[(i, j)]);
        // HBH via two rank-one updates, then drop row/column 0.
        let mut flat: Vec<f64> = (0..nd * nd).map(|t| b[(t / nd, t % nd)]).collect();
        let bh: Vec<f64> = (0..nd)
            .map(|i| (0..nd).map(|j| flat[i * nd + j] * h[j]).sum())
            .collect();
        for i in 0..nd {
            for j in 0..nd {
                flat[i * nd + j] -= 2.0 * bh[i] * h[j];
            }
        }
        let hb: Vec<f64> = (0..nd)
            .map(|j| (0..nd).map(|i| h[i] * flat[i * nd + j]).sum())
            .collect();
        for i in 0..nd {
            for j in 0..nd {
                flat[i * nd + j] -= 2.0 * h[i] * hb[j];
            }
        }
        let b_red = Mat::from_fn(nd - 1, nd - 1, |i, j| flat[(i + 1) * nd + (j + 1)]);
        let red_eig = b_red
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Dense(format!("reduced eigenproblem failed: {e:?}")))?;
        let es = red_eig.S();
        let lambda_min = es[0];
        let lambda_max = es[nd - 2];
        report = report.metric(format!("lambda_min_scan_{idx}"), lambda_min);
        if lambda_min > 1e-12 * lambda_max.abs().max(1.0) {
            found = Some((lambda_min, c2));
            break;
        }
    }
    Ok(match found {
        Some((c1, c2)) => report
            .metric("coercivity_c1", c1)
            .metric("coercivity_c2", c2)
            .note(format!("coercive with C1 = {c1:.6e} at C2 = {c2:.3}")),
        None => report.require(false, "no scanned C2 yields a positive reduced spectrum"),
    })
}

/// Near-kernel of the adjoint operator.
pub struct AdjointKernel {
    pub dimension: usize,
    /// Normalized kernel vectors in grid ordering.
    pub basis: Vec<Vec<f64>>,
    /// Smallest singular values of the equilibrated adjoint, ascending.
    pub singular_values: Vec<f64>,
    pub sigma_max: f64,
    /// `‖T F‖/‖F‖` for each basis vector, relative to the matrix scale.
    pub residuals: Vec<f64>,
    /// Relative distance of the boundary trace of `q` from the span of
    /// the kernel boundary traces (1 when the kernel is empty).
    pub q_distance: f64,
}

/// Compute the adjoint near-kernel by dense SVD of the equilibrated
/// adjoint matrix: directions with `σ < tol·σ_max` count as kernel.
pub fn adjoint_kernel(
    grid: &StripGrid,
    prm: &ProblemParams,
    profile: &AngularProfile,
    tol: Option<f64>,
) -> Result<AdjointKernel> {
    let tol = tol.unwrap_or(tols::KERNEL_TOL);
    let sys = assemble_operator(grid, prm, profile, AssemblyMode::AdjointSkew)?;
    let (eq, _row_scale, col_scale) = ruiz_equilibrate(&sys.matrix, 8);
    let nd = grid.n_dof();
    let dense = to_dense_mat(&eq);
    let svd = dense
        .svd()
        .map_err(|e| Error::Dense(format!("adjoint SVD failed: {e:?}")))?;
    let s = svd.S();
    let sigma_max = s[0];
    let v = svd.V();

    let mut basis = Vec::new();
    let mut residuals = Vec::new();
    let scale = sys.matrix.max_abs();
    for i in (0..nd).rev() {
        if s[i] >= tol * sigma_max {
            break;
        }
        let mut w: Vec<f64> = (0..nd).map(|j| col_scale[j] * v[(j, i)]).collect();
        let n = norm2(&w);
        w.iter_mut().for_each(|x| *x /= n);
        residuals.push(norm2(&sys.matrix.matvec(&w)) / scale);
        basis.push(w);
    }
    let dimension = basis.len();

    let q_distance = if dimension == 0 {
        1.0
    } else {
        let traces: Vec<Vec<f64>> = basis
            .iter()
            .map(|w| (0..grid.n_theta).map(|i| w[grid.idx(i, 0)]).collect())
            .collect();
        let traces = orthonormalize(traces);
        let data = boundary_q_tau(prm, profile, grid.n_theta)?;
        let qn = norm2(&data.q);
        let qhat: Vec<f64> = data.q.iter().map(|&x| x / qn).collect();
        let mut captured = 0.0;
        for t in &traces {
            let c: f64 = qhat.iter().zip(t).map(|(a, b)| a * b).sum();
            captured += c * c;
        }
        (1.0 - captured).max(0.0).sqrt()
    };

    let keep = 6.min(nd);
    let singular_values: Vec<f64> = (0..keep).map(|i| s[nd - 1 - i]).collect();
    Ok(AdjointKernel {
        dimension,
        basis,
        singular_values,
        sigma_max,
        residuals,
        q_distance,
    })
}
