//! Lattice packings of three-dimensional superballs, the unit balls of the
//! ℓᵖ norm.
//!
//! The crate provides:
//!
//! * [`geometry`]: ℓᵖ norms, conjugate exponents, and superball volumes.
//! * [`lattice`]: lattice bases, packing density, the three neighbor
//!   configurations, and finite packing verification.
//! * [`optimizer`]: random-restart Newton search for critical points of the
//!   determinant minimization problem under each neighbor case.
//! * [`family`]: the one-parameter family of circulant packing lattices
//!   L(x, y, z) on p ∈ [1, log₂ 3), solved by damped Newton continuation.
//! * [`interval`]: self-contained outward-rounded interval arithmetic.
//! * [`certifier`]: an effective implicit-function-theorem check that turns
//!   family solutions into rigorous existence certificates over p ranges.
//!
//! The crate is `no_std` (with `alloc`); all floating-point transcendentals
//! come from [`libm`], so results are bit-reproducible across platforms.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod catalog;
pub mod certifier;
pub mod family;
pub mod geometry;
pub mod interval;
pub mod lattice;
mod linalg;
pub mod optimizer;
mod scalar;

pub use scalar::Scalar;
