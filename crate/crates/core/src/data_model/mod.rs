//! Versioned relational storage.
//!
//! Tuples carry provenance IDs (`r1`, `s3`, ...). Updating a tuple appends a
//! new version under the same base ID; once a base has more than one version
//! its IDs render with a time-stamp suffix (`r2@t1`, `r2@t2`).

mod database;
mod id;
mod types;
mod value;

use thiserror::Error;

pub use database::{parse_row, AnnotatedTuple, RelationInstance, Snapshot, VersionedDatabase};
pub use id::ProvenanceId;
pub use types::{is_identifier, Attribute, AttributeType, Schema, MAX_DECIMAL_PRECISION};
pub use value::Value;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DataError {
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("invalid decimal spec decimal({precision},{scale})")]
    InvalidDecimal { precision: u8, scale: u8 },
    #[error("unknown type {0:?}")]
    UnknownType(String),
    #[error("duplicate relation {0}")]
    DuplicateRelation(String),
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("unknown tuple {base} in relation {relation}")]
    UnknownTuple { relation: String, base: String },
    #[error("relation {relation} expects {expected} values, got {found}")]
    ArityMismatch { relation: String, expected: usize, found: usize },
    #[error("type mismatch for {attribute}: expected {expected}, got {found}")]
    TypeMismatch { attribute: String, expected: AttributeType, found: String },
    #[error("cannot read {text:?} as {ty}")]
    InvalidValue { text: String, ty: AttributeType },
    #[error("cannot compare {left} with {right}")]
    Incomparable { left: &'static str, right: &'static str },
    #[error("invalid provenance id {0:?}")]
    InvalidId(String),
    #[error("version {requested} out of range (current version is {current})")]
    VersionOutOfRange { requested: u64, current: u64 },
    #[error("corrupt database state: {0}")]
    Corrupt(String),
}
