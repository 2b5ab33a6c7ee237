//! Provenance for research data: annotated relational queries over a
//! versioned database, a workflow provenance graph, and the bridge that
//! links stored files to both.

pub mod annotations;
pub mod bridge;
pub mod data_model;
pub mod fixtures;
pub mod query;
pub mod questions;
pub mod workflow;
mod render;
