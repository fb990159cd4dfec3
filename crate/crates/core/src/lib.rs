//! Numerical core for discrete Schrödinger operators `h = Δ_Ω + v` on
//! subsets of `ℤ^d`.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure
//! computation: lattice domains, operator assembly and the discrete Green
//! formula, the potential zoo, generalized eigenfunctions and transfer
//! matrices, Borel-transform scaling estimators, and Chebyshev propagation
//! with time-averaged transport moments. File formats, parallel ensembles
//! and the command line live in the `spectrans` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod eigensolutions;
pub mod error;
pub mod fit;
pub mod lattice;
pub mod linalg;
pub mod operator;
pub mod potentials;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use lattice::{DomainKind, LatticeDomain, Site};
pub use operator::SparseHermitianOperator;
pub use potentials::PotentialSpec;

/// Complex scalar used for state vectors and resolvents.
pub type C64 = num_complex::Complex<f64>;
