//! Dense real and integer matrices, eigenvalues, null spaces and subspace
//! intersection.

mod hqr;
mod matrix;
pub mod poly;
mod spectrum;
mod subspace;

pub use matrix::{matrix_power_apply, IntegerMatrix, RealMatrix};
pub use spectrum::{eigenvalues, spectral_order, Eigenvalue, Spectrum};
pub use subspace::{intersect, intersect_with, null_space, Subspace};

pub(crate) use spectrum::{locally_close, raw_eigenvalues, single_linkage_by};
pub(crate) use subspace::null_space_of;
