//! Lattices, occupation-number bases and sector-restricted operators.

mod basis;
mod lattice;
mod operators;
mod sparse;

pub use basis::SectorBasis;
pub use lattice::{LatticeBox, SpinValue};
pub use operators::{
    bosonic_operator, casimir_operator, free_boson_operator, heisenberg_operator, interaction_split,
    pair_operator, Boundary,
};
pub use sparse::SparseSymmetricOperator;
