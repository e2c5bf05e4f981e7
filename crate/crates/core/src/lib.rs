//! Shadowing of quadratic-map orbits by orbits of the complex Hénon map
//! `H_b(x, y) = (x² + c − b·y, x)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`dynamics`]: the maps `q` and `H_b`, their derivatives, the embedding
//!   `g(x) = (q(x), x)`, periodic cycles of `q` and inverse-iteration sampling.
//! * [`window`]: finite windows of bi-infinite sequences together with the
//!   residual operator `F(z)_i = z_{i+1} − H_b(z_i)` and its derivative.
//! * [`linsolve`]: solves of `DF·ξ = η` along orbits, monodromy matrices and
//!   inverse-norm estimates.
//! * [`shadowing`]: frozen-Jacobian continuation in `b`, plus the two
//!   fixed-point operators on scalar sequences.
//! * [`hyperbolicity`]: cone, spectral and solvability checks.
//! * [`loci`]: parameter-plane regions and their rasterization.
//! * [`sets`]: point clouds, Hausdorff distances, motion traces and the
//!   shift/conjugacy check.

pub mod dynamics;
pub mod error;
pub mod hyperbolicity;
pub mod linsolve;
pub mod loci;
pub mod sets;
pub mod shadowing;
pub mod window;

pub use num_complex::Complex64;

pub use dynamics::{Params, Point2, QuadCycle};
pub use error::{Error, Result};
pub use window::{Geometry, OrbitWindow, ScalarWindow, TangentWindow, Window};

/// Formats a float with 17 significant digits, the precision used by every
/// text output of the crate.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
