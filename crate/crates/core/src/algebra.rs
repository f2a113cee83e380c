//! Exact symbolic verification of the algebraic identities behind the
//! boundary sign analysis and the coefficient-matrix spectrum.
//!
//! The [`poly`] submodule provides a minimal exact polynomial ring over the
//! rationals in the fixed symbols `(a, s, k, p)` (with `s` standing for
//! `a_θ`). The [`checks`] submodule states every identity as "difference
//! reduces to the literal zero polynomial" — no floating point, no
//! tolerances — plus the numeric sign scan of `d(τq)/dθ` at the minima of
//! the boundary weight `q`, which is where those identities earn their keep.

pub mod checks;
pub mod poly;

pub use checks::{critical_exponents, verify_det_identity, verify_sign_chain, verify_tauq_sign};
pub use poly::MultiPoly;
