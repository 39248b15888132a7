//! Numerical laboratory for ground states of the coupled cubic Schrödinger
//! system
//!
//! ```text
//! −Δu₁ − τ₁u₁ = μ₁u₁³ + βu₁u₂²,
//! −Δu₂ − τ₂u₂ = μ₂u₂³ + βu₁²u₂,   u₁ = u₂ = 0 on ∂Ω,
//! ```
//!
//! on intervals and rectangles, including the indefinite regime `τᵢ ≥ λ₁`.
//! The crate computes the spectral splitting `H⁺ ⊕ H⁰ ⊕ H⁻`, maximisers on
//! the generalized fibers `ℝ⁺u ⊕ H̃`, the reduced minimum `c′`, discovered
//! critical sets, the coupling thresholds `β̂₁, β̂₂` and the energy report that
//! compares all levels.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discretization;
pub mod error;
pub mod fiber;
pub mod functional;
pub mod levels;
mod newton;
pub mod options;
mod reduced;
pub mod scalar;
pub mod spectral;
pub mod system;
pub mod thresholds;

pub use discretization::{build_grid, DomainKind, DomainSpec, Field, Grid};
pub use error::{Error, Result};
pub use functional::{Pair, Problem, SystemParams};
pub use options::SolverOptions;
pub use spectral::{eigendecompose, split_space, SpaceSplit, Spectrum};
