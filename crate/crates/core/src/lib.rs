//! Exact diagonalization and numerical certification for the spin-S quantum
//! Heisenberg ferromagnet and its spin-wave (free magnon) approximation.
//!
//! Layout follows the computation:
//! - [`model`]: lattices and occupation bases, with the sector operators on them.
//! - [`ed`]: eigensolvers and thermal sums, plus operator-inequality certificates.
//! - [`spinwave`]: dispersion grids, constants, Fock traces and bound assemblies.
//! - [`density`]: two-particle densities and their differential inequalities.
//! - [`kernels`]: random-walk tables, Bessel functions, lattice Green's functions, paths.
//! - [`cli`]: configuration and records for the command dispatcher behind the binary.

pub mod cli;
pub mod density;
pub mod ed;
pub mod error;
pub mod kernels;
pub mod model;
pub mod numeric;
pub mod spinwave;

pub use error::{Error, Result};
