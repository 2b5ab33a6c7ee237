//! The provenance semiring N[X] and witness bases.
//!
//! `+` records alternative derivations (duplicates from projection or union),
//! `*` records joint use (joins). Polynomials are always canonical, so the
//! textual rendering is stable and `==` is semantic equality.

mod polynomial;
mod witness;

use thiserror::Error;

use crate::data_model::ProvenanceId;

pub use polynomial::{Monomial, Polynomial};
pub use witness::{Witness, WitnessBasis};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnotationError {
    #[error("no assignment for variable {0}")]
    MissingVariable(ProvenanceId),
    #[error("arithmetic overflow while specializing")]
    Overflow,
    #[error("witnesses must not be empty")]
    EmptyWitness,
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
}
