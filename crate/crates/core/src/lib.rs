//! Finite element discretizations of plane-strain, transversely isotropic
//! linear elasticity on triangles.
//!
//! The crate covers conforming P1/P2 elements and the three interior penalty
//! discontinuous Galerkin methods (nonsymmetric, symmetric and incomplete) on
//! piecewise linear fields, together with a variant in which the extensional
//! (`β`) jump penalty is integrated with a single midpoint point. That variant
//! removes the extensional locking the full penalty exhibits as the fibre
//! stiffness grows.
//!
//! The crate is `no_std` (it needs `alloc`). Enable the `std` feature to let
//! the sparse factorization use runtime SIMD detection.
//!
//! Module map:
//! - [`material`]: constitutive law, engineering-constant conversions, stability.
//! - [`mesh`]: structured triangulations, edge connectivity and boundary tags.
//! - [`femspace`]: CG1/CG2/DG1 vector spaces, basis functions, quadrature.
//! - [`assembly`]: conforming and IPDG system assembly, coercivity diagnostics.
//! - [`solver`]: sparse direct solves with independent residual checks.
//! - [`analysis`]: norms, errors, convergence rates, interpolation checks.
//! - [`bench`]: Cook's membrane and the bending beam, with the beam's analytic solution.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod assembly;
pub mod bench;
mod error;
pub mod femspace;
pub mod material;
pub mod mesh;
pub mod solver;
pub mod sparse;
pub mod tensor;

pub use error::{Error, Result};
