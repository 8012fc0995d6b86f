//! Numerical search for closed magnetic geodesics on quotient orbifolds
//! `M = Q/G`.
//!
//! The variational problem lives upstairs: loops `(γ, φ, T)` in the total
//! space of a Riemannian locally-free principal `G`-bundle `Q`, a loop of
//! Lie-algebra elements `φ`, and a free period `T`.  Critical points of the
//! functional
//!
//! ```text
//! S_k(γ, φ, T) = 1/(2T) ∫ |γ̇ + φ̲(γ)|² dt + ∫ ⟨φ, Z⟩ dt + k T
//! ```
//!
//! project to closed magnetic geodesics of energy `k − ½|Z|²` on the base.
//! The crate provides the group/bundle kernels, the discretized loop
//! functional with exact gradients, loop-group gauge normalization,
//! saddle-point search (bounded gradient flow with vertical stopping plus
//! mountain-pass minimax and Newton polishing), cotangent-side symplectic
//! reduction, and certification of candidate solutions.

pub mod bundle;
pub mod checks;
pub mod error;
pub mod fourier;
pub mod gauge;
pub mod liegroup;
pub mod loopspace;
pub mod reduction;
pub mod scalar;
pub mod solver;
pub mod verify;

pub use bundle::BundleModel;
pub use error::CoreError;
pub use loopspace::LoopConfiguration;
