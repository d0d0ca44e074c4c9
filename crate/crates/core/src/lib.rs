//! Topological entropy of surjective endomorphisms of connected Lie groups.
//!
//! The entropy of such an endomorphism reduces to the entropy of its
//! restriction to the toral component `T(G)` (the maximal torus in the
//! identity component of the center) for abelian, nilpotent, semi-simple,
//! reductive and compact groups. On a torus `ℝᵖ/ℤᵖ` with lattice map `T` it
//! equals `Σ_{|λ|>1} log|λ|` over the eigenvalues of `T`.
//!
//! - [`linalg`]: matrices, eigenvalues, null spaces, subspace intersection.
//! - [`jordan`]: multiplicative Jordan decomposition `g = e·h·u` and the
//!   recurrent subspace `Fix(h) ∩ Fix(u)` of a linear isomorphism.
//! - [`group`]: structural descriptors of groups and endomorphisms, with
//!   validation and the JSON descriptor format.
//! - [`engine`]: the reduction engine producing an [`EntropyCertificate`].
//! - [`oracle`]: brute-force checks on the torus (separated-set entropy
//!   estimates, recurrence, Li-Yorke pairs) and the adjoint representation.
//! - [`verify`]: the cross-module property suite behind `lientropy verify`.

pub mod config;
pub mod engine;
pub mod error;
pub mod group;
pub mod jordan;
pub mod linalg;
pub mod oracle;
pub mod verify;

pub use config::{LogBase, Options, Tolerances};
pub use engine::{
    abelian_entropy, bowen_formula, compact_entropy, compute, compute_with,
    conjectural_general_entropy, nilpotent_entropy, power_entropy, product_entropy,
    reductive_entropy, semisimple_entropy, torus_entropy, Contribution, EntropyCertificate,
    TraceStep,
};
pub use error::{Error, Result};
pub use group::{
    toral_component, validate, Descriptor, EndoDescriptor, Finding, GroupDescriptor, Severity,
    ValidationReport,
};
pub use jordan::{
    elliptic_invariant_gram, multiplicative_jordan, recurrent_subspace, MultiplicativeJordan,
};
pub use linalg::{IntegerMatrix, RealMatrix, Spectrum, Subspace};
