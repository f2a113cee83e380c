//! Discretization and solution of the linearized equation in strip
//! coordinates `(x, y) = (θ, −ln r)`, plus the nonlinear p-Laplace
//! cross-check on the disk chart.
//!
//! Submodules: [`strip`] holds the grid and nodal fields, [`sparse`] the
//! CSR/ILU/Krylov kit, [`assemble`] the bilinear-form assembly in its
//! several variants, [`oblique`] the boundary-value experiments, and
//! [`plaplace`] the nonlinear solver and the asymptotic-mean-value probe.

pub mod assemble;
pub mod oblique;
pub mod plaplace;
pub mod sparse;
pub mod strip;
