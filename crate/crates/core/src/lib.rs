//! Exact operator algebra for small molecules in a minimal Gaussian basis.
//!
//! The crate lowers second-quantized operators to dense matrices over
//! fixed-particle-number determinant sectors and builds on that to solve
//! coupled-cluster equations at arbitrary excitation rank, construct
//! Hermitian downfolded Hamiltonians in active spaces (exactly, or through
//! truncated commutator expansions), and estimate their ground states by
//! diagonalization or connected-moments functionals.
//!
//! Everything here is pure computation on in-memory data. The crate is
//! `no_std` (with `alloc`) when the default `std` feature is disabled; file
//! formats, configuration and the command line live in a companion crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod ccsolver;
pub mod downfold;
mod error;
pub mod fockspace;
pub mod linalg;
mod math;
pub mod molint;
pub mod pds;
pub mod scf;

pub use error::{Error, Result};

pub use nalgebra::{DMatrix, DVector};
