//! Discretization and analysis of non-local double-integral functionals
//!
//! ```text
//! J(u) = ∫_X ∫_X f(x, y, u(x), u(y)) dx dy,    u : X → Rⁿ,  X ⊂ Rᵐ bounded
//! ```
//!
//! The crate provides:
//!
//! - uniform midpoint-rule grids on box domains with deterministic
//!   compensated quadrature ([`grid`]),
//! - a small expression language for integrands `f(x, y, w, z)` with
//!   symbolic `w`-derivatives ([`expr`], [`integrand`]),
//! - evaluation of `J`, of the profile functions
//!   `Φ_{x,ψ}(w) = ∫_X f(x, y, w, ψ(y)) dy`, and of the variational
//!   gradient ([`functional`]),
//! - sampled checkers for growth bounds, separate convexity, profile
//!   convexity and the null class of integrands whose functional vanishes
//!   identically, plus the constructive separately-convex decomposition
//!   ([`analysis`]),
//! - witness constructions: checkerboard patterns, oscillating sequences,
//!   gluings that force divergence, blowup functions for homogeneous
//!   integrands, and a lower semi-continuity probe ([`witness`]),
//! - a projected-gradient direct-method minimizer ([`minimize`]),
//! - a CLI (`nlf`) and JSON/CSV/SVG reporting ([`cli`], [`report`]).
//!
//! See `examples/` for one runnable walkthrough per capability.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod expr;
pub mod extreal;
pub mod functional;
pub mod grid;
pub mod integrand;
pub mod minimize;
pub mod report;
pub mod sum;
pub mod verdict;
pub mod witness;

pub use error::{Error, Result};
pub use extreal::ExtReal;
pub use grid::{Domain, Exponent, Grid, GridFunction};
pub use integrand::{builtin, builtin_names, Integrand, IntegrandDeriv, SymmetryStatus};
pub use verdict::{PropertyVerdict, VerdictStatus, Witness, DEFAULT_SEED};
