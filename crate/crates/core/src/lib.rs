//! Quasiradial p-harmonic functions and their linearized coefficient fields on
//! the punctured unit disk.
//!
//! The crate builds separable solutions `f = r^k a(θ)` of the p-Laplace
//! equation, the symmetric coefficient matrix `A` of the equation obtained by
//! linearizing along `f`, and the boundary data (`q`, `τ`) that turn the
//! normal derivative into an oblique derivative. On top of that sit:
//!
//! * exact polynomial verification (over the rationals) of the determinant and
//!   sign-chain identities used by the boundary analysis ([`algebra`]),
//! * weighted-norm quadrature, the disk/strip energy change of variables, the
//!   skew-augmented Dirichlet form, its coercivity constant, and the discrete
//!   adjoint kernel ([`weighted`]),
//! * a strip-coordinate solver for the singular oblique boundary-value
//!   problem together with mean-value-gap, flux and regularity experiments,
//!   and a nonlinear p-Laplace Dirichlet solver for cross-checks ([`solver`]).
//!
//! Everything is deterministic: given the same inputs (including RNG seeds for
//! spot-check batches) all routines produce bitwise-identical results, also
//! with the `parallel` feature enabled (parallel maps are indexed and reduced
//! sequentially; see [`exec`]).

pub mod algebra;
pub mod coeffs;
pub mod error;
pub mod exec;
pub mod field;
pub mod ode;
pub mod params;
pub mod profile;
pub mod quadrature;
pub mod report;
pub mod solver;
pub mod tols;
pub mod trig;
pub mod weighted;

pub use error::{Error, Result};
pub use params::{Branch, ProblemParams};
pub use profile::AngularProfile;
