//! Spin-wave side: dispersion grids, constants, lattice integrals, Fock-space
//! traces and the assembled free-energy bounds.

pub mod constants;
pub mod dispersion;
pub mod integral;

pub use constants::{constants, zeta, ConstantRecord, Constants};
pub use dispersion::{cube_log_sum, dispersion_grid, free_boson_free_energy, DispersionGrid, GridBoundary};
pub use integral::{
    dispersion_bound_check, lattice_integral, riemann_and_integral_checks, site_occupation, IntegralSplit, RiemannReport,
};
pub mod bounds;
pub use bounds::{lower_bound, preliminary_lower_bound, upper_bound, AuxValue, BoundAssembly, BoundKind, BoundTerm, MeasuredConstants, Provenance};
pub mod fock;
pub use fock::{
    hardcore_ratio, heat_kernel_domination_check, permanent, projected_energy_trace, projected_entropy_check, HardcoreReport,
};
