//! Symmetries of the deformed backward heat equation
//! `γ η_t = −(γ²/2) η_qq + V η` with `V = C/q² + D q²`, and the Bernstein
//! diffusions built from its positive solutions.
//!
//! - [`field`]: exact term algebra for isovector coefficients.
//! - [`jet`]: truncated Taylor jets for exact partial derivatives.
//! - [`isovectors`]: generator bases, brackets, structure constants.
//! - [`solutions`]: closed-form solutions, tilde actions, group actions, Ω_η.
//! - [`sde`]: seeded path simulation (Bernstein, affine, BESQ, OU).
//! - [`martingale`]: statistical martingale checks and density fits.

pub mod field;
pub mod isovectors;
pub mod jet;
pub mod martingale;
pub mod sde;
pub mod solutions;
