//! Quadratization of higher-order spin polynomials into QUBOs.

pub mod gadget;
pub mod quadratize;
pub mod resources;
pub mod spin;

pub use crate::qubo::{AncillaRecord, GadgetKind, Qubo};
pub use gadget::{
    reduce_3body_single_ancilla, reduce_kbody_term, verify_gadget, Certified, CertificationFailure, Gadget,
    GadgetParams, CERTIFY_TOL, DEFAULT_SCALE, MAX_CERTIFY_VARS,
};
pub use quadratize::{min_over_ancillas, quadratize, GadgetStrategy, QuadratizeConfig, ReductionStats, ScaleMode};
pub use resources::{dense_memory_bytes, estimate_resources, ResourceEstimate, StructuredEstimate};
pub use spin::{boolean_to_spin, spin_to_boolean};
