//! Pinned numerical tolerances and scheme constants.
//!
//! Every tolerance that gates a constructor, an invariant check or an
//! acceptance threshold lives here with its rationale, so the numbers are
//! fixed in one place and referenced everywhere else.

/// Residual of the exponent quadratic at the accepted root, relative to the
/// coefficient scale. The root is computed by the numerically stable quadratic
/// formula, so anything above a few ulps indicates a construction bug.
pub const EXPONENT_RESIDUAL: f64 = 1e-12;

/// Absolute + relative tolerance of the adaptive profile integration.
/// Tighter than strictly needed for function values: the profile residual is
/// certified through spectral differentiation of the samples, which amplifies
/// sample noise by O(n_modes), so the integrator must deliver ~1e-12 to keep
/// the certified residual below [`PROFILE_RESIDUAL`].
pub const ODE_TOL: f64 = 1e-12;

/// Max-norm bound on the first-order-system residual of an accepted profile
/// (spectral derivative of the samples vs. the ODE right-hand side).
pub const PROFILE_RESIDUAL: f64 = 1e-8;

/// Safety factor for the centered-difference second-derivative residual of a
/// profile. That residual has an irreducible O(h²·|a''''|) floor, so it is
/// checked against `FD_RESIDUAL_SAFETY · h² · max|a''''|` rather than a fixed
/// number.
pub const FD_RESIDUAL_SAFETY: f64 = 10.0;

/// Periodicity / endpoint-closure defect allowed for a profile over one
/// fundamental period.
pub const PROFILE_PERIODICITY: f64 = 1e-8;

/// Agreement required between the closed-form parametrization of a profile
/// and its ODE integration, on their common angular window.
pub const PROFILE_PARAMETRIC_AGREEMENT: f64 = 1e-6;

/// Trapezoid mass defect allowed for prescribed boundary flux densities.
pub const BOUNDARY_MASS_DEFECT: f64 = 1e-10;

/// Relative residual target of the sparse iterative linear solver.
pub const LINEAR_RESIDUAL: f64 = 1e-10;

/// Singular values below `KERNEL_TOL · σ_max` of the (equilibrated) discrete
/// adjoint operator are treated as kernel directions.
pub const KERNEL_TOL: f64 = 1e-8;

/// Newton increment / residual reduction target of the nonlinear p-Laplace
/// solver.
pub const NEWTON_TOL: f64 = 1e-9;

/// Gradient regularization of the nonlinear p-Laplace solver:
/// `|∇u|² → |∇u|² + DELTA_REG²` keeps the linearization bounded where the
/// gradient vanishes without perturbing solutions above discretization error.
pub const DELTA_REG: f64 = 1e-10;

/// Mean-value-gap detection margin: the first radius `r0 < 1` with
/// `|ḡ(r0) − ḡ(1)| · 2π > GAP_MARGIN · M · (1 − r0)` witnesses the failure of
/// the mean value principle. The sharp constant is 1/2; 0.4 absorbs
/// discretization error.
pub const GAP_MARGIN: f64 = 0.4;

/// Far-field depth rule: `y_max = ceil(ln(10^12) / (2 α_strip))`, i.e. the
/// strip is truncated where the bookkeeping weight `e^{-2 α_strip y}` has
/// decayed below `FARFIELD_WEIGHT_FLOOR`.
pub const FARFIELD_WEIGHT_FLOOR: f64 = 1e-12;

/// Sign-lemma margin: every local minimum of `q` must satisfy
/// `d(τq)/dθ > TAUQ_MARGIN · max|τq| / period`.
pub const TAUQ_MARGIN: f64 = 1e-8;

/// Inner radius of the sector quadrature rule (the integrands carry positive
/// powers of `r`, so the excluded mass is far below quadrature error).
pub const QUADRATURE_EPS: f64 = 1e-6;

/// Relative tolerance of the disk-vs-strip energy identity check.
pub const ENERGY_AGREEMENT: f64 = 1e-6;

/// Default sample count per fundamental period for angular profiles.
pub const PROFILE_SAMPLES: usize = 512;

/// Default strip grid resolution.
pub const DEFAULT_NX: usize = 128;
/// Default strip grid resolution (vertical intervals).
pub const DEFAULT_NY: usize = 256;
/// Minimum admissible strip grid resolution in either direction.
pub const MIN_GRID: usize = 32;
