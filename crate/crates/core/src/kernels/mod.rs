//! Lattice kernels: Bessel functions, random-walk tables, the massive
//! lattice Green's function and its reflected sums, and the discrete path
//! census.

pub mod bessel;
pub mod greens;
pub mod paths;
pub mod reflection;
pub mod walk;

pub use bessel::{i0_bound_check, bessel_in, bessel_in_scaled, bessel_in_series, heat_kernel_diag, scaled_bessel_sequence};
pub use greens::{decay_bound_check, greens, greens_properties_check, GreenEvaluator, GreenValue};
pub use paths::{brute_force_census, path_census, path_exponent_fit, PathCensus, PathFit};
pub use reflection::{reflection_sum_check, ReflectionSumReport};
pub use walk::{gaussian_bound_check, walk_table, WalkKey, WalkTable};
