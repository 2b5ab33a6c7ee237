//! SQL-subset front end and provenance-annotated evaluation.
//!
//! Queries parse into relational algebra and evaluate over a database
//! snapshot under K-relation semantics: scans annotate each tuple with its
//! own ID, joins multiply annotations, and projection or union add the
//! annotations of rows that become value-equal.

mod ast;
mod eval;
mod parser;
mod typing;
mod why_not;

use thiserror::Error;

pub use ast::{AlgebraExpr, CmpOp, Literal, Operand, Predicate, Projection};
pub use eval::{evaluate, AnnotatedResult, ResultRow, SourceCell};
pub use parser::parse_query;
pub use typing::{output_columns, Column};
pub use why_not::{why_not, Expectation, OperandValue, WhyNotExplanation, WhyNotFinding};

use crate::annotations::WitnessBasis;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("syntax error at token {token} (offset {offset}): {message}")]
    Syntax { token: usize, offset: usize, message: String },
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("unknown attribute {0}")]
    UnknownAttribute(String),
    #[error("duplicate attribute {0} in projection")]
    DuplicateAttribute(String),
    #[error("projection must name at least one attribute")]
    EmptyProjection,
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("union operands differ: ({left}) vs ({right})")]
    SchemaMismatch { left: String, right: String },
    #[error("natural join without shared attributes: ({left}) and ({right})")]
    NoSharedAttribute { left: String, right: String },
    #[error("row {0} is not in the result")]
    RowAbsent(usize),
    #[error("invalid expectation: {0}")]
    InvalidExpectation(String),
    #[error("not missing: the expected row is part of the result")]
    NotMissing,
}

/// Witness basis of result row `row`.
pub fn why_provenance(result: &AnnotatedResult, row: usize) -> Result<WitnessBasis, QueryError> {
    result.why_provenance(row)
}

/// Source cells copied into `(row, attribute)`.
pub fn where_provenance(result: &AnnotatedResult, row: usize, attribute: &str) -> Result<BTreeSet<SourceCell>, QueryError> {
    result.where_provenance(row, attribute).cloned()
}

/// Declared type and contributing relations of every output attribute.
pub fn what_provenance(result: &AnnotatedResult) -> Vec<Column> {
    result.what_provenance().to_vec()
}
