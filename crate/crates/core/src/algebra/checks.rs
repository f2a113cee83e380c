//! The verification chain: every algebraic identity used by the boundary
//! sign analysis, checked exactly, plus the numeric scan that applies them.
//!
//! Symbol conventions throughout (matching [`super::poly`]):
//! `s = a_θ`, `S = s² + k²a²`, `B = s² + (p−1)k²a²`, `W = (p−1)s² + k²a²`
//! (the denominator of the profile potential `V = V_num/W`), and
//! `D = (3k²−V)s² + ((p−1)k²−(p−3)V)k²a²`, the quartic controlling the sign
//! of `q_θ`. Division never happens: identities involving `V` are stated
//! after clearing `W`, so each check is "difference of two polynomials is
//! the literal zero polynomial".

use crate::algebra::poly::MultiPoly;
use crate::coeffs::BoundaryFns;
use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::profile::AngularProfile;
use crate::report::CheckReport;
use crate::tols;
use num::{BigInt, BigRational};

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `S = s² + k²a²`.
fn s_poly() -> MultiPoly {
    MultiPoly::s().pow(2) + MultiPoly::k().pow(2) * MultiPoly::a().pow(2)
}

/// `B = s² + (p−1)k²a²`.
fn b_poly() -> MultiPoly {
    MultiPoly::s().pow(2)
        + (MultiPoly::p() - MultiPoly::int(1)) * MultiPoly::k().pow(2) * MultiPoly::a().pow(2)
}

/// `W = (p−1)s² + k²a²`, the potential denominator.
fn w_poly() -> MultiPoly {
    (MultiPoly::p() - MultiPoly::int(1)) * MultiPoly::s().pow(2)
        + MultiPoly::k().pow(2) * MultiPoly::a().pow(2)
}

/// `β = (2p−3)k² − (p−2)k`.
fn beta_poly() -> MultiPoly {
    (MultiPoly::int(2) * MultiPoly::p() - MultiPoly::int(3)) * MultiPoly::k().pow(2)
        - (MultiPoly::p() - MultiPoly::int(2)) * MultiPoly::k()
}

/// `γ = (p−1)k² − (p−2)k`.
fn gamma_poly() -> MultiPoly {
    (MultiPoly::p() - MultiPoly::int(1)) * MultiPoly::k().pow(2)
        - (MultiPoly::p() - MultiPoly::int(2)) * MultiPoly::k()
}

/// `V_num = β s² + γ k²a²`, the potential numerator.
fn v_num_poly() -> MultiPoly {
    beta_poly() * MultiPoly::s().pow(2)
        + gamma_poly() * MultiPoly::k().pow(2) * MultiPoly::a().pow(2)
}

/// `D·W`: the sign quartic with its denominator cleared.
fn d_cleared_poly() -> MultiPoly {
    let k2 = MultiPoly::k().pow(2);
    let ka2 = MultiPoly::k().pow(2) * MultiPoly::a().pow(2);
    (MultiPoly::int(3) * &k2 * w_poly() - v_num_poly()) * MultiPoly::s().pow(2)
        + ((MultiPoly::p() - MultiPoly::int(1)) * &k2 * w_poly()
            - (MultiPoly::p() - MultiPoly::int(3)) * v_num_poly())
            * ka2
}

/// The quartic with the four printed coefficients inserted.
fn magic_poly() -> MultiPoly {
    let (k, p) = (MultiPoly::k(), MultiPoly::p());
    let k2 = k.pow(2);
    let c_s4 = &p * (&k2 + &k) - MultiPoly::int(2) * &k;
    let c_mid = p.pow(2) * (-&k2 + &k) + &p * (MultiPoly::int(6) * &k2 - MultiPoly::int(4) * &k)
        + (MultiPoly::int(-4) * &k2 + MultiPoly::int(4) * &k);
    let c_a4 = p.pow(2) * (-&k2 + &k) + &p * (MultiPoly::int(5) * &k2 - MultiPoly::int(5) * &k)
        + (MultiPoly::int(-4) * &k2 + MultiPoly::int(6) * &k);
    let (a, s) = (MultiPoly::a(), MultiPoly::s());
    c_s4 * s.pow(4) + c_mid * s.pow(2) * &k2 * a.pow(2) + c_a4 * k2.pow(2) * a.pow(4)
}

/// The linear-in-`(s², k²a²)` factor of the quartic.
fn magic_linear_factor() -> MultiPoly {
    let (k, p) = (MultiPoly::k(), MultiPoly::p());
    let k2 = k.pow(2);
    let c_s2 = &p * (&k2 + &k) - MultiPoly::int(2) * &k;
    let c_a2 = p.pow(2) * (-&k2 + &k) + &p * (MultiPoly::int(5) * &k2 - MultiPoly::int(5) * &k)
        + (MultiPoly::int(-4) * &k2 + MultiPoly::int(6) * &k);
    c_s2 * MultiPoly::s().pow(2) + c_a2 * &k2 * MultiPoly::a().pow(2)
}

fn describe(diff: &MultiPoly) -> String {
    if diff.num_terms() <= 12 {
        format!("surviving terms: {diff}")
    } else {
        format!("{} surviving terms", diff.num_terms())
    }
}

fn zero_step(report: CheckReport, step: &str, diff: MultiPoly) -> CheckReport {
    let pass = diff.is_zero();
    report
        .metric(format!("residual_terms_{step}"), diff.num_terms() as f64)
        .require(pass, format!("{step}: {}", describe(&diff)))
}

/// Determinant identity of the coefficient bracket matrix:
/// `det Ã = (p−1)(s² + k²a²)²` exactly, plus the `p = 2` isotropy
/// specialization and an exact rational spot check.
pub fn verify_det_identity() -> CheckReport {
    let (a, s, k, p) = (
        MultiPoly::a(),
        MultiPoly::s(),
        MultiPoly::k(),
        MultiPoly::p(),
    );
    let off = (&p - MultiPoly::int(2)) * &k * &a * &s;
    let m00 = s.pow(2) + (&p - MultiPoly::int(1)) * k.pow(2) * a.pow(2);
    let m11 = k.pow(2) * a.pow(2) + (&p - MultiPoly::int(1)) * s.pow(2);
    let det = &m00 * &m11 - off.pow(2);
    let want = (&p - MultiPoly::int(1)) * s_poly().pow(2);

    let mut report = CheckReport::new("determinant_identity");
    report = zero_step(report, "det", &det - &want);

    // p = 2: the matrix is isotropic and the determinant collapses to S².
    let det_p2 = det.substitute(3, &MultiPoly::int(2));
    report = zero_step(report, "det_at_p2", det_p2 - s_poly().pow(2));

    // Exact rational spot check at (a, s, k, p) = (2, 3, 5, 7).
    let pt = [rat(2), rat(3), rat(5), rat(7)];
    let equal = det.eval(&pt) == want.eval(&pt);
    report
        .metric("spot_check_equal", equal as u8 as f64)
        .require(equal, "rational spot check at (2,3,5,7) disagreed")
}

/// The full sign-lemma chain, each step an exact zero polynomial:
/// the four printed coefficient identities, the cleared quartic, its
/// factorization, the `(2−p)D` factor-out of the `q_θ` bracket, the
/// `(τq)_θ` factorization, and the `p = 4` specializations.
pub fn verify_sign_chain() -> CheckReport {
    let (a, s, k, p) = (
        MultiPoly::a(),
        MultiPoly::s(),
        MultiPoly::k(),
        MultiPoly::p(),
    );
    let k2 = k.pow(2);
    let one = MultiPoly::int(1);
    let mut report = CheckReport::new("sign_chain");

    // Step 1–4: the four coefficient identities, exactly as printed.
    let i1 = MultiPoly::int(3) * &k2 * (&p - &one) - beta_poly()
        - (&p * (&k2 + &k) - MultiPoly::int(2) * &k);
    report = zero_step(report, "coeff_identity_1", i1);

    let i2 = MultiPoly::int(3) * &k2
        - gamma_poly()
        - (&p * (-&k2 + &k) + MultiPoly::int(4) * &k2 - MultiPoly::int(2) * &k);
    report = zero_step(report, "coeff_identity_2", i2);

    let i3 = (&p - &one).pow(2) * &k2
        - (&p - MultiPoly::int(3)) * beta_poly()
        - (p.pow(2) * (-&k2 + &k)
            + &p * (MultiPoly::int(7) * &k2 - MultiPoly::int(5) * &k)
            + (MultiPoly::int(-8) * &k2 + MultiPoly::int(6) * &k));
    report = zero_step(report, "coeff_identity_3", i3);

    let i4 = (&p - &one) * &k2
        - (&p - MultiPoly::int(3)) * gamma_poly()
        - (p.pow(2) * (-&k2 + &k)
            + &p * (MultiPoly::int(5) * &k2 - MultiPoly::int(5) * &k)
            + (MultiPoly::int(-4) * &k2 + MultiPoly::int(6) * &k));
    report = zero_step(report, "coeff_identity_4", i4);

    // Step 5: D with denominator cleared equals the quartic.
    report = zero_step(report, "d_cleared_equals_quartic", d_cleared_poly() - magic_poly());

    // Step 6: the quartic factorizes through S.
    report = zero_step(
        report,
        "quartic_factorizes",
        magic_poly() - magic_linear_factor() * s_poly(),
    );

    // Step 7: the q_θ bracket collapses to a·s·(2−p)·D (cleared by W).
    let a_theta_w = MultiPoly::int(2) * &a * &s * (&k2 * w_poly() - v_num_poly());
    let b_theta_w =
        MultiPoly::int(2) * &a * &s * ((&p - &one) * &k2 * w_poly() - v_num_poly());
    let bracket = MultiPoly::ratio(1, 2) * (MultiPoly::int(4) - &p) * &a_theta_w * b_poly()
        - s_poly() * &b_theta_w;
    let collapsed = &a * &s * (MultiPoly::int(2) - &p) * d_cleared_poly();
    report = zero_step(report, "q_bracket_factor_out", bracket - collapsed);

    // Step 8: the (τq)_θ factorization, through its printed middle form.
    let lhs = MultiPoly::int(2) * a.pow(2) * s.pow(2) * ((&p - &one) * &k2 * w_poly() - v_num_poly())
        - b_poly() * (s.pow(2) * w_poly() - v_num_poly() * a.pow(2));
    let mid = (&p - &one) * &k2 * v_num_poly() * a.pow(4)
        + ((&p - &one) * &k2 * w_poly() - v_num_poly()) * a.pow(2) * s.pow(2)
        - s.pow(4) * w_poly();
    let rhs = ((&p - &one) * &k2 * a.pow(2) - s.pow(2)) * (v_num_poly() * a.pow(2) + s.pow(2) * w_poly());
    report = zero_step(report, "tauq_simplifies", &lhs - &mid);
    report = zero_step(report, "tauq_factorizes", mid - rhs);

    // Step 9: at p = 4 the quartic D collapses onto (3k² − V)·S.
    let four = MultiPoly::int(4);
    let d4 = d_cleared_poly().substitute(3, &four);
    let collapse4 =
        (MultiPoly::int(3) * &k2 * w_poly() - v_num_poly()).substitute(3, &four) * s_poly();
    report = zero_step(report, "p4_d_collapses", d4 - collapse4);

    // Step 10: the p = 4 "V = 3k² is impossible" simplification.
    let w4 = w_poly().substitute(3, &four);
    let vnum4 = v_num_poly().substitute(3, &four);
    let residue = MultiPoly::int(3) * &k2 * w4
        - vnum4
        - ((MultiPoly::int(4) * &k2 + MultiPoly::int(2) * &k) * s.pow(2)
            + MultiPoly::int(2) * k.pow(3) * a.pow(2));
    report = zero_step(report, "p4_crest_unreachable", residue);

    // Exact rational spot check of the chained evaluation at (1, 1, 3, 5):
    // evaluate V as a rational number, form D directly, compare with the
    // expanded quartic divided back by W, and the bracket both ways.
    let pt = [rat(1), rat(1), rat(3), rat(5)];
    let w_val = w_poly().eval(&pt);
    let v_val = v_num_poly().eval(&pt) / &w_val;
    let (k2v, pv) = (rat(9), rat(5));
    let d_direct = (rat(3) * &k2v - &v_val) * rat(1)
        + (&(&pv - rat(1)) * &k2v - (&pv - rat(3)) * &v_val) * &k2v * rat(1);
    let d_from_quartic = magic_poly().eval(&pt) / &w_val;
    let spot1 = d_direct == d_from_quartic;
    let bracket_direct = {
        let a_t = rat(2) * (&k2v - &v_val); // A_θ/(a·s) at the point
        let b_t = rat(2) * (&(&pv - rat(1)) * &k2v - &v_val);
        let b_val = b_poly().eval(&pt);
        let s_val = s_poly().eval(&pt);
        (rat(4) - &pv) / rat(2) * a_t * b_val - s_val * b_t
    };
    let bracket_collapsed = (rat(2) - &pv) * &d_direct;
    let spot2 = bracket_direct == bracket_collapsed;
    report
        .metric("spot_check_equal", (spot1 && spot2) as u8 as f64)
        .require(spot1, "chained evaluation of D at (1,1,3,5) disagreed")
        .require(spot2, "chained evaluation of the q_θ bracket disagreed")
}

/// The two roots `p_{1,2} = 5/2 ∓ (1/2)√((9k−1)/(k−1))` of the quadratic
/// `(−k+1)p² + (5k−5)p + (−4k+6)` appearing in the quartic's factor,
/// ordered `p1 < p2`.
pub fn critical_exponents(k: f64) -> Result<(f64, f64)> {
    if !(k > 1.0) {
        return Err(Error::Sign(format!(
            "critical exponents need k > 1, got k = {k}"
        )));
    }
    let half_root = 0.5 * ((9.0 * k - 1.0) / (k - 1.0)).sqrt();
    Ok((2.5 - half_root, 2.5 + half_root))
}

/// Numeric realization of the sign lemma on a concrete profile: every local
/// minimum of `q` must have `d(τq)/dθ` strictly positive with margin.
///
/// The derivative is evaluated by the analytic product rule (no numerical
/// differentiation). Additionally locates all zeros of `q_θ` and confirms
/// each lies in `{a = 0} ∪ {a_θ = 0} ∪ {D = 0}`, and confirms the zeros of
/// the profile itself are local maxima of `q` (negative second derivative).
/// Requires the lemma's hypothesis `k ≥ 2`; pass `None` for the default
/// margin `1e−8·max|τq|/period`.
pub fn verify_tauq_sign(
    prm: &ProblemParams,
    profile: &AngularProfile,
    margin: Option<f64>,
) -> Result<CheckReport> {
    if prm.k < 2.0 {
        return Err(Error::Sign(format!(
            "sign lemma requires k >= 2; k(p={}, N={}) = {:.6}",
            prm.p, prm.n_sym, prm.k
        )));
    }
    let fns = BoundaryFns::new(prm, profile);
    let period = prm.period();
    let m = 4096usize;
    let h = period / m as f64;
    let grid: Vec<f64> = (0..m).map(|i| i as f64 * h).collect();
    let q: Vec<f64> = grid.iter().map(|&t| fns.q(t)).collect();

    let tauq_scale = grid
        .iter()
        .map(|&t| (fns.tau(t) * fns.q(t)).abs())
        .fold(0.0f64, f64::max);
    let margin = margin.unwrap_or(tols::TAUQ_MARGIN * tauq_scale / period);

    // Local minima by nodewise comparison, then quadratic refinement.
    let mut minima = Vec::new();
    for i in 0..m {
        let (qm, qi, qp) = (q[(i + m - 1) % m], q[i], q[(i + 1) % m]);
        if qi < qm && qi < qp {
            let denom = qp - 2.0 * qi + qm;
            let shift = if denom > 0.0 {
                (0.5 * (qm - qp) / denom).clamp(-0.5, 0.5)
            } else {
                0.0
            };
            minima.push(grid[i] + shift * h);
        }
    }
    let mut report = CheckReport::new("tauq_sign")
        .metric("n_minima", minima.len() as f64)
        .metric("margin", margin);
    if minima.is_empty() {
        return Ok(report.require(false, "no local minima of q detected"));
    }
    let mut min_slope = f64::INFINITY;
    let mut worst_theta = f64::NAN;
    for &theta in &minima {
        let slope = fns.tauq_theta(theta);
        if slope < min_slope {
            min_slope = slope;
            worst_theta = theta;
        }
    }
    report = report.metric("min_slope", min_slope).require(
        min_slope > margin,
        format!("d(τq)/dθ = {min_slope:.6e} at minimum θ₀ = {worst_theta:.6} under margin"),
    );

    // Zeros of q_θ must lie in the union {a = 0} ∪ {s = 0} ∪ {D = 0}.
    let a_scale = profile.a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let s_scale = profile
        .a_theta
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let d_scale = grid
        .iter()
        .map(|&t| fns.d_value(t).abs())
        .fold(0.0f64, f64::max);
    let mut zero_set_defect = 0.0f64;
    for i in 0..m {
        let (t0, t1) = (grid[i], grid[i] + h);
        let (g0, g1) = (fns.q_theta(t0), fns.q_theta(t1));
        if g0 == 0.0 || g0 * g1 >= 0.0 {
            continue;
        }
        // Bisect the sign change.
        let (mut lo, mut hi, mut glo) = (t0, t1, g0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let gm = fns.q_theta(mid);
            if gm == 0.0 {
                lo = mid;
                break;
            }
            if gm * glo < 0.0 {
                hi = mid;
            } else {
                lo = mid;
                glo = gm;
            }
        }
        let theta_z = 0.5 * (lo + hi);
        let (a, s) = profile.eval_pair(theta_z);
        let nearest = (a.abs() / a_scale)
            .min(s.abs() / s_scale)
            .min(fns.d_value(theta_z).abs() / d_scale);
        zero_set_defect = zero_set_defect.max(nearest);
    }
    report = report.metric("zero_set_defect", zero_set_defect).require(
        zero_set_defect < 1e-6,
        format!("a zero of q_θ sits {zero_set_defect:.3e} away from {{a,s,D}} zero sets"),
    );

    // Zeros of the profile are local maxima of q: q_θθ < 0 there.
    let mut max_curv = f64::NEG_INFINITY;
    for i in 0..m {
        let (a0, a1) = (profile.eval(grid[i]), profile.eval(grid[i] + h));
        if a0 == 0.0 || a0 * a1 >= 0.0 {
            continue;
        }
        let (mut lo, mut hi, mut alo) = (grid[i], grid[i] + h, a0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let am = profile.eval(mid);
            if am == 0.0 {
                lo = mid;
                break;
            }
            if am * alo < 0.0 {
                hi = mid;
            } else {
                lo = mid;
                alo = am;
            }
        }
        max_curv = max_curv.max(fns.q_theta2_at_critical(0.5 * (lo + hi)));
    }
    Ok(report
        .metric("max_q_curvature_at_profile_zeros", max_curv)
        .require(
            max_curv < 0.0,
            format!("q_θθ = {max_curv:.3e} at a profile zero is not negative"),
        ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Branch;
    use crate::profile::profile_ode;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn determinant_identity_reduces_to_zero() {
        let r = verify_det_identity();
        assert!(r.pass, "{:?}", r.notes);
        assert_eq!(r.metrics["residual_terms_det"], 0.0);
        assert_eq!(r.metrics["residual_terms_det_at_p2"], 0.0);
    }

    #[test]
    fn sign_chain_reduces_to_zero() {
        let r = verify_sign_chain();
        assert!(r.pass, "{:?}", r.notes);
        for (key, value) in &r.metrics {
            if key.starts_with("residual_terms_") {
                assert_eq!(*value, 0.0, "{key}");
            }
        }
    }

    #[test]
    fn verified_identities_agree_at_random_rational_points() {
        let pairs = [
            (d_cleared_poly(), magic_poly()),
            (magic_poly(), magic_linear_factor() * s_poly()),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for (lhs, rhs) in &pairs {
            for _ in 0..100 {
                let pt = [
                    rat(rng.gen_range(-9..10)),
                    rat(rng.gen_range(-9..10)),
                    rat(rng.gen_range(-9..10)),
                    rat(rng.gen_range(-9..10)),
                ];
                assert_eq!(lhs.eval(&pt), rhs.eval(&pt));
            }
        }
    }

    #[test]
    fn critical_exponent_values() {
        let (p1, p2) = critical_exponents(2.0).unwrap();
        let want = (5.0 + 17.0f64.sqrt()) / 2.0;
        assert!((p2 - want).abs() < 1e-12);
        assert!((p2 - 4.561_552_8).abs() < 1e-7);
        assert!((p1 + p2 - 5.0).abs() < 1e-12);
        for k in [1.1, 1.5, 2.0, 5.0, 50.0] {
            let (p1, _) = critical_exponents(k).unwrap();
            assert!(p1 < 1.0, "k={k}: p1={p1}");
        }
        for k in [2.0, 3.0, 10.0] {
            let (_, p2) = critical_exponents(k).unwrap();
            assert!(p2 > 4.0, "k={k}: p2={p2}");
        }
        assert!(critical_exponents(1.0).is_err());
        assert!(critical_exponents(0.5).is_err());
    }

    #[test]
    fn critical_exponents_are_roots_of_the_quartic_coefficient() {
        // (−k+1)(p−p1)(p−p2) must reproduce the a²-coefficient polynomial.
        for k in [2.0, 3.5, 7.0] {
            let (p1, p2) = critical_exponents(k).unwrap();
            for p in [1.3, 4.2, 6.8] {
                let via_roots = (-k + 1.0) * (p - p1) * (p - p2);
                let direct = (-k + 1.0) * p * p + (5.0 * k - 5.0) * p + (-4.0 * k + 6.0);
                assert!((via_roots - direct).abs() < 1e-10 * direct.abs().max(1.0));
            }
        }
    }

    #[test]
    fn sign_scan_passes_where_hypotheses_hold() {
        let prm = ProblemParams::new(4.0, 3, Branch::Larger).unwrap();
        let prof = profile_ode(&prm, 512, tols::ODE_TOL).unwrap();
        let report = verify_tauq_sign(&prm, &prof, None).unwrap();
        assert!(report.pass, "{:?}", report.notes);
        assert!(report.metrics["min_slope"] > 0.0);
        assert!(report.metrics["n_minima"] >= 1.0);
        assert!(report.metrics["max_q_curvature_at_profile_zeros"] < 0.0);
    }

    #[test]
    fn sign_scan_rejects_small_k() {
        // k(4, 2) ≈ 1.62 violates the k ≥ 2 hypothesis.
        let prm = ProblemParams::new(4.0, 2, Branch::Larger).unwrap();
        let prof = profile_ode(&prm, 256, tols::ODE_TOL).unwrap();
        assert!(verify_tauq_sign(&prm, &prof, None).is_err());
    }
}
