//! Mass-conserving parabolic obstacle problem on the flat unit 2-torus.
//!
//! The library simulates the nonlocal free boundary problem
//!
//! ```text
//! ∂_t u - Δu = -1 + g/λ(t)   in {u > 0},    u ≥ 0,
//! λ(t) = mean of g over {u(·,t) > 0},
//! ```
//!
//! whose multiplier λ enforces conservation of ∫u, together with the
//! variational value Λ_S = sup { mean of g over A : A ⊇ S } that governs
//! whether λ and the support are continuous at t = 0 or jump.
//!
//! Modules:
//! - [`grid`]: periodic geometry, integration, heat solves, distance
//!   transforms and the δ-set calculus;
//! - [`variational`]: λ₀, α₀, Λ, the canonical maximizer set, and the
//!   continuity/jump/non-generic classification of initial data;
//! - [`initdata`]: coefficient and initial-data constructions (bumps,
//!   Michaelis-Menten collar data, the monotone approximating sequence);
//! - [`solver`]: IMEX time integration of the regularized and classical
//!   problems, support extraction, trajectory recording;
//! - [`experiments`]: CLI-facing experiment harness and reports.

pub mod error;
pub mod experiments;
pub mod grid;
pub mod initdata;
pub mod solver;
pub mod variational;

pub use error::{Error, Result};
