//! Workflow provenance as a PROV-style graph.
//!
//! Agents, activities and entities are linked by the nine PROV relations,
//! each pointing from the result back to its origin. Plans and their
//! revisions carry the prospective and evolution dimensions; timestamped
//! activities carry the retrospective one. Activities nest through `parent`,
//! which lets one graph answer both coarse and fine questions.

mod document;
mod graph;
mod model;
mod traverse;

use thiserror::Error;

pub use graph::ProvGraph;
pub use model::{
    Activity, AgentKind, Edge, EdgeType, Entity, EntityCategory, Node, NodeKind, Note, NoteKind, Timestamp,
};
pub use traverse::{ChainLink, Granularity};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("invalid node id {0:?}")]
    InvalidId(String),
    #[error("duplicate node id {0}")]
    DuplicateNode(String),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("{edge_type} cannot link {from} to {to}")]
    KindViolation { edge_type: EdgeType, from: String, to: String },
    #[error("duplicate edge {edge_type}({from} -> {to})")]
    DuplicateEdge { edge_type: EdgeType, from: String, to: String },
    #[error("wasRevisionOf cycle through {0}")]
    RevisionCycle(String),
    #[error("activity nesting cycle through {0}")]
    NestingCycle(String),
    #[error("parent {parent} of activity {activity} is not an activity")]
    InvalidParent { activity: String, parent: String },
    #[error("activity {0} ends before it starts")]
    EndBeforeStart(String),
    #[error("note author {0} is not an agent")]
    AuthorNotAgent(String),
    #[error("{0} is not an entity")]
    NotAnEntity(String),
    #[error("{0} is not a plan entity")]
    NotAPlan(String),
    #[error("ambiguous revision chain at {0}")]
    AmbiguousRevisionChain(String),
    #[error("malformed graph document: {0}")]
    Malformed(String),
}
