//! Brute-force checks that do not go through the reduction engine.

pub mod adjoint;
pub mod estimate;
pub mod liyorke;
pub mod recurrence;
pub mod torus;

pub use adjoint::{
    adjoint_matrix, conjugation_recurrent_membership, verify_adjoint_jordan,
    verify_adjoint_jordan_with, AdjointJordanReport,
};
pub use estimate::{estimate_entropy, EntropyEstimate, EstimateConfig, RateSample};
pub use liyorke::{li_yorke_search, LiYorkeSearch, LiYorkeWitness};
pub use recurrence::{recurrence_check, RecurrenceReport};
pub use torus::{torus_iterate, TorusPoint};
