//! Acceptance suite: one test per release criterion, each printing a
//! single pass/fail line (run with `--nocapture` to see them). Criteria
//! with a runtime budget include the elapsed wall time in the verdict.
//!
//! The tests serialize on a mutex: several of them time themselves, and
//! the core already parallelizes internally, so concurrent criteria would
//! only distort budgets.

use std::f64::consts::TAU;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use plap_core::algebra::checks::{verify_det_identity, verify_sign_chain, verify_tauq_sign};
use plap_core::coeffs::CoefficientField;
use plap_core::field::{observed_order, p_laplace_residual, QuasiradialField};
use plap_core::params::solve_exponent;
use plap_core::profile::{parametric_agreement, profile_ode};
use plap_core::quadrature::DiskQuadrature;
use plap_core::solver::assemble::AssemblyMode;
use plap_core::solver::oblique::{
    mean_value_gap, mms_convergence, neumann_integral, regularity_probe, solve_oblique,
};
use plap_core::solver::plaplace::solve_p_laplace_dirichlet;
use plap_core::solver::strip::StripGrid;
use plap_core::weighted::{
    adjoint_kernel, coercivity_check, strip_energy_check, DiskField,
};
use plap_core::{tols, Branch, ProblemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(number: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {number:02} [{name}]: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {number} [{name}] failed: {detail}");
}

fn profile_for(p: f64, n: u32) -> (ProblemParams, plap_core::AngularProfile) {
    let prm = ProblemParams::new(p, n, Branch::Larger).unwrap();
    let prof = profile_ode(&prm, 256, 1e-13).unwrap();
    (prm, prof)
}

#[test]
fn criterion_01_exponent_closed_forms() {
    let _guard = serial();
    let t0 = Instant::now();
    let cases = [
        (4.0, 1u32, 1.0),
        (4.0, 2, (11.0 + 13.0f64.sqrt()) / 9.0),
        (4.0, 3, (23.0 + 124.0f64.sqrt()) / 15.0),
    ];
    let mut worst = 0.0f64;
    for (p, n, exact) in cases {
        let k = solve_exponent(p, n, Branch::Larger).unwrap();
        worst = worst.max((k - exact).abs());
    }
    // Larger root approaches N monotonically as p decreases to 2; the gap
    // closes at the linear rate (p−2)/p, so the final gap scales with the
    // last step of the sequence.
    let ps = [2.5, 2.25, 2.125, 2.0625, 2.03125, 2.015625, 2.0078125, 2.00390625];
    let mut monotone = true;
    let mut final_gap = 0.0f64;
    for n in 1u32..=3 {
        let gaps: Vec<f64> = ps
            .iter()
            .map(|&p| (solve_exponent(p, n, Branch::Larger).unwrap() - n as f64).abs())
            .collect();
        monotone &= gaps.windows(2).all(|w| w[1] <= w[0] + 1e-15);
        final_gap = final_gap.max(*gaps.last().unwrap());
    }
    let elapsed = t0.elapsed();
    let pass = worst < 1e-12 && monotone && final_gap < 1e-2 && elapsed < Duration::from_secs(1);
    verdict(
        1,
        "exponent closed forms",
        pass,
        &format!(
            "max closed-form error {worst:.2e}, monotone {monotone}, \
             final gap {final_gap:.2e}, {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_02_profile_exactness() {
    let _guard = serial();
    let t0 = Instant::now();
    let (_, prof) = profile_for(4.0, 1);
    let mut cos_err = 0.0f64;
    for i in 0..=4096 {
        let theta = TAU * i as f64 / 4096.0;
        cos_err = cos_err.max((prof.eval(theta) - theta.cos()).abs());
    }
    let mut agree = 0.0f64;
    for p in [3.0, 4.0, 6.0] {
        for n in [2u32, 3] {
            let (prm, prof) = profile_for(p, n);
            agree = agree.max(parametric_agreement(&prm, &prof).unwrap());
        }
    }
    let elapsed = t0.elapsed();
    let pass = cos_err < 1e-8
        && agree < tols::PROFILE_PARAMETRIC_AGREEMENT
        && elapsed < Duration::from_secs(10);
    verdict(
        2,
        "profile exactness",
        pass,
        &format!("cosine error {cos_err:.2e}, worst parametric agreement {agree:.2e}, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_03_p_harmonicity() {
    let _guard = serial();
    let t0 = Instant::now();
    let (prm, prof) = profile_for(4.0, 3);
    let field = QuasiradialField::new(&prm, &prof);
    let f = move |x: f64, y: f64| field.eval_xy(x, y);
    let spacings = [0.02, 0.01, 0.005, 0.0025];
    let res = p_laplace_residual(&f, prm.p, &spacings).unwrap();
    let order = observed_order(&spacings, &res);
    let elapsed = t0.elapsed();
    let pass = order >= 1.9 && elapsed < Duration::from_secs(30);
    verdict(
        3,
        "discrete p-harmonicity",
        pass,
        &format!("observed order {order:.3} over three halvings, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_04_symbolic_suite() {
    let _guard = serial();
    let t0 = Instant::now();
    let det = verify_det_identity();
    let chain = verify_sign_chain();
    let exact_zero = det
        .metrics
        .iter()
        .chain(chain.metrics.iter())
        .filter(|(k, _)| k.starts_with("residual_terms"))
        .all(|(_, &v)| v == 0.0);
    let elapsed = t0.elapsed();
    let pass = det.pass && chain.pass && exact_zero && elapsed < Duration::from_secs(1);
    verdict(
        4,
        "symbolic identity suite",
        pass,
        &format!(
            "determinant pass {}, sign chain pass {}, all residual polynomials empty {exact_zero}, {elapsed:.2?}",
            det.pass, chain.pass
        ),
    );
}

#[test]
fn criterion_05_sign_lemma() {
    let _guard = serial();
    let mut pass = true;
    let mut detail = String::new();
    for p in [4.0, 5.0, 6.0] {
        // Smallest N whose larger exponent satisfies the lemma hypothesis.
        let n = (1u32..=8)
            .find(|&n| solve_exponent(p, n, Branch::Larger).unwrap() >= 2.0)
            .unwrap();
        let (prm, prof) = profile_for(p, n);
        let report = verify_tauq_sign(&prm, &prof, None).unwrap();
        let slope_ok = report.metrics["min_slope"] > report.metrics["margin"];
        pass &= slope_ok;
        // The profile-zero maxima claim is part of the p = 4 statement.
        if p == 4.0 {
            pass &= report.pass;
            pass &= report.metrics["max_q_curvature_at_profile_zeros"] < 0.0;
        }
        detail.push_str(&format!(
            "p={p}: N={n} (k={:.3}), min d(τq)/dθ {:.3e} vs margin {:.3e}; ",
            prm.k, report.metrics["min_slope"], report.metrics["margin"]
        ));
    }
    verdict(5, "sign lemma scan", pass, detail.trim_end_matches("; "));
}

#[test]
fn criterion_06_eigenstructure() {
    let _guard = serial();
    let (prm, prof) = profile_for(4.0, 3);
    let field = CoefficientField::new(&prm, &prof);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_ratio = 0.0f64;
    let mut worst_res = 0.0f64;
    for _ in 0..1000 {
        let r: f64 = rng.gen_range(0.05..1.0);
        let theta: f64 = rng.gen_range(0.0..TAU);
        let m = field.coeff_matrix(r, theta).unwrap();
        let e = field.eigen_pair(r, theta).unwrap();
        worst_ratio = worst_ratio.max((e.mu_plus / e.mu_minus - (prm.p - 1.0)).abs());
        let scale = (m[0][0].hypot(m[0][1])).hypot(m[1][0].hypot(m[1][1]));
        for (v, mu) in [(e.v_plus, e.mu_plus), (e.v_minus, e.mu_minus)] {
            let av = [
                m[0][0] * v[0] + m[0][1] * v[1],
                m[1][0] * v[0] + m[1][1] * v[1],
            ];
            let res = (av[0] - mu * v[0]).hypot(av[1] - mu * v[1]);
            worst_res = worst_res.max(res / scale);
        }
    }
    let pass = worst_ratio < 1e-12 && worst_res < 1e-12;
    verdict(
        6,
        "coefficient eigenstructure",
        pass,
        &format!("1000 random points: ratio defect {worst_ratio:.2e}, eigen residual {worst_res:.2e}"),
    );
}

#[test]
fn criterion_07_energy_change_of_variables() {
    let _guard = serial();
    let (prm, prof) = profile_for(4.0, 3);
    let n = prm.n_sym as f64;
    let rule = DiskQuadrature::unit_disk(192, 64).unwrap();

    type Pair<'f> = (
        &'f (dyn Fn(f64, f64) -> f64 + Sync),
        &'f (dyn Fn(f64, f64) -> (f64, f64) + Sync),
    );
    let v1 = move |r: f64, t: f64| r * (n * t).cos();
    let g1 = move |r: f64, t: f64| ((n * t).cos(), -n * r * (n * t).sin());
    let v2 = |r: f64, _t: f64| r * r;
    let g2 = |r: f64, _t: f64| (2.0 * r, 0.0);
    let v3 = |r: f64, t: f64| r.powi(3) * (2.0 * t).sin();
    let g3 = |r: f64, t: f64| {
        (
            3.0 * r * r * (2.0 * t).sin(),
            2.0 * r.powi(3) * (2.0 * t).cos(),
        )
    };
    let v4 = |r: f64, t: f64| r * r * t.cos() + r.powi(4);
    let g4 = |r: f64, t: f64| (2.0 * r * t.cos() + 4.0 * r.powi(3), -r * r * t.sin());
    let v5 = move |r: f64, t: f64| r.powf(1.5) * (n * t).cos();
    let g5 = move |r: f64, t: f64| {
        (
            1.5 * r.sqrt() * (n * t).cos(),
            -n * r.powf(1.5) * (n * t).sin(),
        )
    };
    let fields: [Pair; 5] = [
        (&v1, &g1),
        (&v2, &g2),
        (&v3, &g3),
        (&v4, &g4),
        (&v5, &g5),
    ];

    let mut worst = 0.0f64;
    let mut all = true;
    for (value, grad) in fields {
        let field = DiskField { value, grad };
        let report = strip_energy_check(&field, &prm, &prof, &rule);
        all &= report.pass;
        worst = worst.max(report.metrics["relative_defect"]);
    }
    let alpha_ok = [(4.0, 2u32), (4.0, 3), (6.0, 3)].iter().all(|&(p, n)| {
        let prm = ProblemParams::new(p, n, Branch::Larger).unwrap();
        prm.alpha_strip == prm.alpha_space + 1.0
    });
    let pass = all && worst < tols::ENERGY_AGREEMENT && alpha_ok;
    verdict(
        7,
        "disk/strip energy equality",
        pass,
        &format!("worst relative defect over 5 fields {worst:.2e}, alpha offset exact {alpha_ok}"),
    );
}

#[test]
fn criterion_08_solver_convergence() {
    let _guard = serial();
    let (prm, prof) = profile_for(4.0, 3);
    let sizes = [(64usize, 64usize), (128, 128), (256, 256)];
    let mut errors = Vec::new();
    let mut slowest = Duration::ZERO;
    for (nx, ny) in sizes {
        let grid = StripGrid::new(&prm, nx, ny, None).unwrap();
        let t0 = Instant::now();
        let errs = mms_convergence(&prm, &prof, std::slice::from_ref(&grid), AssemblyMode::SkewForm)
            .unwrap();
        slowest = slowest.max(t0.elapsed());
        errors.push(errs[0]);
    }
    let orders: Vec<f64> = errors
        .windows(2)
        .map(|w| (w[0] / w[1]).ln() / 2.0f64.ln())
        .collect();
    let order = *orders.last().unwrap();
    let pass = order >= 1.8 && slowest < Duration::from_secs(60);
    verdict(
        8,
        "manufactured-solution convergence",
        pass,
        &format!(
            "interior L2 errors [{}], orders {orders:.3?}, slowest solve {slowest:.2?}",
            errors
                .iter()
                .map(|e| format!("{e:.3e}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    );
}

#[test]
fn criterion_09_neumann_experiment() {
    let _guard = serial();
    let (prm, prof) = profile_for(4.0, 3);
    let grid = StripGrid::new(&prm, 64, 96, None).unwrap();
    let m = 1.0;
    let sol = solve_oblique(&grid, &prm, &prof, m, AssemblyMode::SkewForm, true).unwrap();
    let flux = neumann_integral(&sol.field, &sol.boundary);
    let flux_ok = (flux - m).abs() <= 0.02 * m;
    let (r0, gap) = mean_value_gap(&sol.field, m).unwrap();
    let gap_ok = gap > 0.4 * m * (1.0 - r0) && r0 > 0.0 && r0 < 1.0;
    let pass = flux_ok && gap_ok;
    verdict(
        9,
        "flux recovery and mean-value gap",
        pass,
        &format!(
            "∮∂v/∂n dθ = {flux:.4} (target 1 ± 2%), gap {gap:.3e} at r0 = {r0:.4} \
             exceeds 0.4·M·(1−r0) = {:.3e}",
            0.4 * m * (1.0 - r0)
        ),
    );
}

#[test]
fn criterion_10_regularity_probes() {
    let _guard = serial();
    let (prm, prof) = profile_for(4.0, 3);
    let grids: Vec<StripGrid> = [(32usize, 48usize), (48, 72), (64, 96)]
        .iter()
        .map(|&(nx, ny)| StripGrid::new(&prm, nx, ny, None).unwrap())
        .collect();
    let report = regularity_probe(&prm, &prof, &grids).unwrap();
    let gamma = report.metrics["gamma"];
    let stability = report.metrics["sup_rgrad_stability"];
    let pass = report.pass && gamma > 0.0 && stability < 0.10;
    verdict(
        10,
        "boundedness and decay probes",
        pass,
        &format!(
            "max-principle and gradient checks pass {}, sup r|∇v| drift {stability:.3}, γ = {gamma:.3}",
            report.pass
        ),
    );
}

#[test]
fn criterion_11_nonlinear_cross_check() {
    let _guard = serial();
    let (prm, prof) = profile_for(4.0, 2);
    let g = {
        let prof = prof.clone();
        move |theta: f64| prof.eval(theta)
    };
    let (sol, _) = solve_p_laplace_dirichlet(prm.p, &g, 128, 128, tols::NEWTON_TOL).unwrap();
    let rel = sol.rel_l2_error(|r, t| r.powf(prm.k) * prof.eval(t));

    let harmonic = |theta: f64| (2.0 * theta).cos();
    let (sol2, _) = solve_p_laplace_dirichlet(2.0, &harmonic, 128, 128, tols::NEWTON_TOL).unwrap();
    let rel2 = sol2.rel_l2_error(|r, t| r * r * (2.0 * t).cos());

    let pass = rel < 0.01 && rel2 < 1e-6;
    verdict(
        11,
        "p-Laplace cross-check",
        pass,
        &format!("quasiradial relative L2 error {rel:.3e} (< 1%), harmonic sanity {rel2:.2e} (< 1e-6)"),
    );
}

#[test]
fn criterion_12_coercivity_and_fredholm() {
    let _guard = serial();
    let (prm, prof) = profile_for(4.0, 3);
    let grid = StripGrid::new(&prm, 32, 32, None).unwrap();
    let coercive = coercivity_check(&grid, &prm, &prof, &[1.0, 10.0, 100.0, 1000.0], true).unwrap();

    let coarse = StripGrid::new(&prm, 32, 32, None).unwrap();
    let fine = StripGrid::new(&prm, 64, 64, None).unwrap();
    let k_coarse = adjoint_kernel(&coarse, &prm, &prof, None).unwrap();
    let k_fine = adjoint_kernel(&fine, &prm, &prof, None).unwrap();
    let stable = k_coarse.dimension == k_fine.dimension;

    let pass = coercive.pass && stable && k_fine.q_distance > 1e-3;
    verdict(
        12,
        "coercivity and adjoint kernel",
        pass,
        &format!(
            "coercive at C2 = {:?}, kernel dim {} -> {} under refinement, q distance {:.3e}",
            coercive.metrics.get("coercivity_c2"),
            k_coarse.dimension,
            k_fine.dimension,
            k_fine.q_distance
        ),
    );
}
