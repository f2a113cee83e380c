//! Coefficient field of the linearized p-Laplace operator, boundary
//! functions, and the skew augmentation used by the Dirichlet form.
//!
//! Linearizing `div(|∇f|^{p−2}∇f)` at the quasiradial function
//! `f = r^k a(θ)` produces `div°(A∇°v)` in the moving polar frame, with the
//! symmetric matrix
//!
//! ```text
//! A(r,θ) = r^{(p−2)(k−1)} S^{(p−4)/2} ·
//!          [ a_θ² + (p−1)k²a²      (p−2)k·a·a_θ      ]
//!          [ (p−2)k·a·a_θ          k²a² + (p−1)a_θ²  ],
//!          S = a_θ² + k²a².
//! ```
//!
//! Everything here is a pointwise function of `(a, a_θ)` pulled from the
//! profile's spectral interpolant; no secondary interpolation is introduced.
//! The boundary pair
//!
//! ```text
//! q = S^{(4−p)/2} / (a_θ² + (p−1)k²a²),
//! τ = −S^{(p−4)/2} (p−2) k a a_θ
//! ```
//!
//! converts between the outward normal derivative and the conormal-plus-
//! drift boundary operator: ∂/∂n = q(∂/∂n* + τ ∂/∂θ). The skew matrix
//! `C = [[0, −c], [c, 0]]` with `c(r,θ) = −τ(θ)η(r)` (η a C² cutoff
//! vanishing below r = 1/2) absorbs the drift into the bilinear form; its
//! quadratic form is identically zero, so `B = A + C` keeps A's ellipticity.

use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::profile::{angular_potential, AngularProfile};
use crate::tols;

/// Pointwise evaluator for the coefficient matrix and its spectral data.
#[derive(Clone, Debug)]
pub struct CoefficientField<'a> {
    pub prm: ProblemParams,
    pub profile: &'a AngularProfile,
}

/// Closed-form eigenstructure of `A` at one point; `mu_minus ≤ mu_plus`.
#[derive(Clone, Copy, Debug)]
pub struct EigenPair {
    pub mu_minus: f64,
    pub mu_plus: f64,
    pub v_minus: [f64; 2],
    pub v_plus: [f64; 2],
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

fn mat_vec(m: &[[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

impl<'a> CoefficientField<'a> {
    pub fn new(prm: &ProblemParams, profile: &'a AngularProfile) -> Self {
        CoefficientField { prm: *prm, profile }
    }

    /// The θ-dependent factor `A(1, θ)`: full matrix without the radial
    /// power `r^{2·alpha_space}`.
    pub fn angular_matrix(&self, theta: f64) -> [[f64; 2]; 2] {
        let (p, k) = (self.prm.p, self.prm.k);
        let (a, s) = self.profile.eval_pair(theta);
        let ka2 = k * k * a * a;
        let big_s = s * s + ka2;
        let w = big_s.powf((p - 4.0) / 2.0);
        let off = w * (p - 2.0) * k * a * s;
        [
            [w * (s * s + (p - 1.0) * ka2), off],
            [off, w * (ka2 + (p - 1.0) * s * s)],
        ]
    }

    /// Full coefficient matrix `A(r, θ)`; rejects the degenerate point r = 0.
    pub fn coeff_matrix(&self, r: f64, theta: f64) -> Result<[[f64; 2]; 2]> {
        if !(r > 0.0) {
            return Err(Error::Field(format!(
                "coefficient matrix undefined at r = {r}; need r > 0"
            )));
        }
        let pow_r = r.powf(2.0 * self.prm.alpha_space);
        let mut m = self.angular_matrix(theta);
        for row in &mut m {
            for v in row {
                *v *= pow_r;
            }
        }
        Ok(m)
    }

    /// Closed-form eigenvalues `(1, p−1)·r^{2α}S^{(p−2)/2}` with eigenvector
    /// candidates `(k a, a_θ)` and `(−a_θ, k a)`, paired by direct residual
    /// test against the assembled matrix rather than by formula order.
    pub fn eigen_pair(&self, r: f64, theta: f64) -> Result<EigenPair> {
        let m = self.coeff_matrix(r, theta)?;
        let (p, k) = (self.prm.p, self.prm.k);
        let (a, s) = self.profile.eval_pair(theta);
        let big_s = s * s + k * k * a * a;
        let scalar = r.powf(2.0 * self.prm.alpha_space) * big_s.powf((p - 4.0) / 2.0);
        let mu_small = scalar * big_s;
        let mu_large = (p - 1.0) * scalar * big_s;

        let mut cand = [[k * a, s], [-s, k * a]];
        for v in &mut cand {
            let n = norm2(*v);
            v[0] /= n;
            v[1] /= n;
        }
        let res = |v: [f64; 2], mu: f64| {
            let av = mat_vec(&m, v);
            (av[0] - mu * v[0]).hypot(av[1] - mu * v[1])
        };
        // Pair each candidate with the eigenvalue it actually satisfies.
        let straight = res(cand[0], mu_large).max(res(cand[1], mu_small));
        let crossed = res(cand[0], mu_small).max(res(cand[1], mu_large));
        let (v_plus, v_minus) = if straight <= crossed {
            (cand[0], cand[1])
        } else {
            (cand[1], cand[0])
        };
        Ok(EigenPair {
            mu_minus: mu_small,
            mu_plus: mu_large,
            v_minus,
            v_plus,
        })
    }
}

/// Analytic boundary functions and their θ-derivatives.
///
/// All derivatives use the profile equation `a_θθ = −V·a` instead of
/// numerical differentiation, so they are exact up to the profile's own
/// interpolation error.
#[derive(Clone, Debug)]
pub struct BoundaryFns<'a> {
    p: f64,
    k: f64,
    profile: &'a AngularProfile,
}

impl<'a> BoundaryFns<'a> {
    pub fn new(prm: &ProblemParams, profile: &'a AngularProfile) -> Self {
        BoundaryFns {
            p: prm.p,
            k: prm.k,
            profile,
        }
    }

    fn parts(&self, theta: f64) -> (f64, f64, f64, f64, f64) {
        let (a, s) = self.profile.eval_pair(theta);
        let ka2 = self.k * self.k * a * a;
        let big_s = s * s + ka2; // S = a_θ² + k²a²
        let b = s * s + (self.p - 1.0) * ka2; // B = a_θ² + (p−1)k²a²
        let v = angular_potential(self.p, self.k, a, s);
        (a, s, big_s, b, v)
    }

    /// `q(θ) = S^{(4−p)/2}/B > 0`.
    pub fn q(&self, theta: f64) -> f64 {
        let (_, _, big_s, b, _) = self.parts(theta);
        big_s.powf((4.0 - self.p) / 2.0) / b
    }

    /// `τ(θ) = −S^{(p−4)/2}(p−2)k·a·a_θ`.
    pub fn tau(&self, theta: f64) -> f64 {
        let (a, s, big_s, _, _) = self.parts(theta);
        -big_s.powf((self.p - 4.0) / 2.0) * (self.p - 2.0) * self.k * a * s
    }

    /// Analytic `dτ/dθ`, via `S_θ = 2as(k² − V)` and `(as)_θ = s² − Va²`.
    pub fn tau_prime(&self, theta: f64) -> f64 {
        let (a, s, big_s, _, v) = self.parts(theta);
        let (p, k) = (self.p, self.k);
        -(p - 2.0)
            * k
            * big_s.powf((p - 6.0) / 2.0)
            * ((p - 4.0) * (k * k - v) * a * a * s * s + big_s * (s * s - v * a * a))
    }

    /// The sign-carrying quartic `D = (3k²−V)a_θ² + ((p−1)k²−(p−3)V)k²a²`.
    pub fn d_value(&self, theta: f64) -> f64 {
        let (a, s, _, _, v) = self.parts(theta);
        let (p, k) = (self.p, self.k);
        (3.0 * k * k - v) * s * s + ((p - 1.0) * k * k - (p - 3.0) * v) * k * k * a * a
    }

    /// Analytic `q_θ = B^{−2} S^{(2−p)/2} (2−p)·a·a_θ·D`.
    pub fn q_theta(&self, theta: f64) -> f64 {
        let (a, s, big_s, b, _) = self.parts(theta);
        big_s.powf((2.0 - self.p) / 2.0) / (b * b) * (2.0 - self.p) * a * s * self.d_value(theta)
    }

    /// Analytic `d(τq)/dθ` by the product rule on `τq = −(p−2)k·a·a_θ/B`.
    pub fn tauq_theta(&self, theta: f64) -> f64 {
        let (a, s, _, b, v) = self.parts(theta);
        let (p, k) = (self.p, self.k);
        let b_theta = 2.0 * a * s * ((p - 1.0) * k * k - v);
        let aas_theta = s * s - v * a * a;
        -(p - 2.0) * k * (aas_theta * b - a * s * b_theta) / (b * b)
    }

    /// `q_θθ` at points where `a·a_θ = 0` (the only places it is needed):
    /// `(2−p)(a_θ² − Va²) B^{−2} S^{(2−p)/2} D`.
    pub fn q_theta2_at_critical(&self, theta: f64) -> f64 {
        let (a, s, big_s, b, v) = self.parts(theta);
        (2.0 - self.p) * (s * s - v * a * a) * big_s.powf((2.0 - self.p) / 2.0) / (b * b)
            * self.d_value(theta)
    }
}

/// Sampled boundary data for one fundamental period.
#[derive(Clone, Debug)]
pub struct BoundaryData {
    pub n_sym: u32,
    /// Uniform nodes on `[0, 2π/N)`.
    pub theta_grid: Vec<f64>,
    pub q: Vec<f64>,
    pub tau: Vec<f64>,
    /// Prescribed Neumann data samples; zero until [`BoundaryData::with_psi`].
    pub psi: Vec<f64>,
    /// Target of `∫₀^{2π} ψ dθ`.
    pub m_target: f64,
}

impl BoundaryData {
    /// Periodic trapezoid quadrature of ψ over the full circle `[0, 2π)`
    /// (the fundamental-period sum times N).
    pub fn psi_mass(&self) -> f64 {
        let n = self.theta_grid.len() as f64;
        let h = std::f64::consts::TAU / (self.n_sym as f64 * n);
        self.psi.iter().sum::<f64>() * h * self.n_sym as f64
    }

    /// Attach Neumann data; fails if its circle integral misses the target.
    pub fn with_psi(mut self, psi: Vec<f64>, m_target: f64) -> Result<Self> {
        if psi.len() != self.theta_grid.len() {
            return Err(Error::Field(format!(
                "ψ sample count {} does not match grid {}",
                psi.len(),
                self.theta_grid.len()
            )));
        }
        self.psi = psi;
        self.m_target = m_target;
        let defect = (self.psi_mass() - m_target).abs();
        if defect > tols::BOUNDARY_MASS_DEFECT * m_target.abs().max(1.0) {
            return Err(Error::Field(format!(
                "ψ mass defect {defect:.3e} exceeds tolerance"
            )));
        }
        Ok(self)
    }

    /// Positivity of q at every node.
    pub fn validate(&self) -> Result<()> {
        for (i, &qi) in self.q.iter().enumerate() {
            if !(qi > 0.0) {
                return Err(Error::Field(format!(
                    "q({:.6}) = {qi:.3e} is not positive",
                    self.theta_grid[i]
                )));
            }
        }
        Ok(())
    }
}

/// Sample q and τ on a uniform fundamental-period grid.
pub fn boundary_q_tau(
    prm: &ProblemParams,
    profile: &AngularProfile,
    n_nodes: usize,
) -> Result<BoundaryData> {
    if n_nodes < 8 {
        return Err(Error::Field("need at least 8 boundary nodes".into()));
    }
    let fns = BoundaryFns::new(prm, profile);
    let h = prm.period() / n_nodes as f64;
    let theta_grid: Vec<f64> = (0..n_nodes).map(|i| i as f64 * h).collect();
    let q: Vec<f64> = theta_grid.iter().map(|&t| fns.q(t)).collect();
    let tau: Vec<f64> = theta_grid.iter().map(|&t| fns.tau(t)).collect();
    let data = BoundaryData {
        n_sym: prm.n_sym,
        theta_grid,
        q,
        tau,
        psi: vec![0.0; n_nodes],
        m_target: 0.0,
    };
    data.validate()?;
    Ok(data)
}

/// C² cutoff: quintic smoothstep, 0 below 1/2, 1 at 1, flat at both ends.
pub fn cutoff(r: f64) -> f64 {
    let u = ((r - 0.5) * 2.0).clamp(0.0, 1.0);
    ((6.0 * u - 15.0) * u + 10.0) * u * u * u
}

/// Derivative of [`cutoff`] with respect to r.
pub fn cutoff_deriv(r: f64) -> f64 {
    let u = (r - 0.5) * 2.0;
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    60.0 * u * u * (1.0 - u) * (1.0 - u)
}

/// The scalar `c(r,θ) = −τ(θ)·η(r)` of the skew augmentation; satisfies
/// `−c(1,θ) = τ(θ)` and vanishes for `r < 1/2`.
pub fn skew_c(fns: &BoundaryFns, r: f64, theta: f64) -> f64 {
    -fns.tau(theta) * cutoff(r)
}

/// Frame gradient `(e_r(c), e_θ(c))` of the skew scalar.
pub fn skew_c_gradient(fns: &BoundaryFns, r: f64, theta: f64) -> (f64, f64) {
    let er = -fns.tau(theta) * cutoff_deriv(r);
    let et = -fns.tau_prime(theta) * cutoff(r) / r;
    (er, et)
}

/// The skew-augmented matrix `B = A + C`, `C = [[0, −c], [c, 0]]`.
pub fn skew_field(
    field: &CoefficientField,
    fns: &BoundaryFns,
    r: f64,
    theta: f64,
) -> Result<[[f64; 2]; 2]> {
    let mut m = field.coeff_matrix(r, theta)?;
    let c = skew_c(fns, r, theta);
    m[0][1] -= c;
    m[1][0] += c;
    Ok(m)
}
