use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub type Timestamp = DateTime<Utc>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Person,
    Organization,
    Software,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityCategory {
    Data,
    Sample,
    Device,
    Document,
    Plan,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Activity {
    pub start: Option<Timestamp>,
    pub end: Option<Timestamp>,
    /// Enclosing activity; nesting expresses granularity.
    pub parent: Option<String>,
    pub attributes: BTreeMap<String, String>,
}

impl Activity {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn during(mut self, start: Timestamp, end: Timestamp) -> Self {
        self.start = Some(start);
        self.end = Some(end);
        self
    }

    pub fn within(mut self, parent: impl Into<String>) -> Self {
        self.parent = Some(parent.into());
        self
    }

    pub fn with_attribute(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.attributes.insert(key.into(), value.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub category: EntityCategory,
    pub attributes: BTreeMap<String, String>,
}

impl Entity {
    pub fn new(category: EntityCategory) -> Self {
        Entity { category, attributes: BTreeMap::new() }
    }

    pub fn with_attribute(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.attributes.insert(key.into(), value.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Agent(AgentKind),
    Activity(Activity),
    Entity(Entity),
}

impl NodeKind {
    pub fn label(&self) -> &'static str {
        match self {
            NodeKind::Agent(_) => "agent",
            NodeKind::Activity(_) => "activity",
            NodeKind::Entity(e) if e.category == EntityCategory::Plan => "plan entity",
            NodeKind::Entity(_) => "entity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
}

impl Node {
    pub fn agent(id: impl Into<String>, kind: AgentKind) -> Self {
        Node { id: id.into(), kind: NodeKind::Agent(kind) }
    }

    pub fn activity(id: impl Into<String>, activity: Activity) -> Self {
        Node { id: id.into(), kind: NodeKind::Activity(activity) }
    }

    pub fn entity(id: impl Into<String>, entity: Entity) -> Self {
        Node { id: id.into(), kind: NodeKind::Entity(entity) }
    }

    pub fn as_activity(&self) -> Option<&Activity> {
        match &self.kind {
            NodeKind::Activity(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_entity(&self) -> Option<&Entity> {
        match &self.kind {
            NodeKind::Entity(e) => Some(e),
            _ => None,
        }
    }

    pub fn is_agent(&self) -> bool {
        matches!(self.kind, NodeKind::Agent(_))
    }

    pub fn is_plan(&self) -> bool {
        self.as_entity().is_some_and(|e| e.category == EntityCategory::Plan)
    }

    pub fn attribute(&self, key: &str) -> Option<&str> {
        match &self.kind {
            NodeKind::Agent(_) => None,
            NodeKind::Activity(a) => a.attributes.get(key).map(String::as_str),
            NodeKind::Entity(e) => e.attributes.get(key).map(String::as_str),
        }
    }
}

/// PROV relation types. Edges point from the result to its origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EdgeType {
    Used,
    WasGeneratedBy,
    WasAssociatedWith,
    WasAttributedTo,
    ActedOnBehalfOf,
    WasDerivedFrom,
    WasInformedBy,
    HadPlan,
    WasRevisionOf,
}

impl EdgeType {
    pub const ALL: [EdgeType; 9] = [
        EdgeType::Used,
        EdgeType::WasGeneratedBy,
        EdgeType::WasAssociatedWith,
        EdgeType::WasAttributedTo,
        EdgeType::ActedOnBehalfOf,
        EdgeType::WasDerivedFrom,
        EdgeType::WasInformedBy,
        EdgeType::HadPlan,
        EdgeType::WasRevisionOf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeType::Used => "used",
            EdgeType::WasGeneratedBy => "wasGeneratedBy",
            EdgeType::WasAssociatedWith => "wasAssociatedWith",
            EdgeType::WasAttributedTo => "wasAttributedTo",
            EdgeType::ActedOnBehalfOf => "actedOnBehalfOf",
            EdgeType::WasDerivedFrom => "wasDerivedFrom",
            EdgeType::WasInformedBy => "wasInformedBy",
            EdgeType::HadPlan => "hadPlan",
            EdgeType::WasRevisionOf => "wasRevisionOf",
        }
    }

    /// Whether `from -> to` respects the endpoint kinds of this relation.
    pub fn admits(self, from: &Node, to: &Node) -> bool {
        use NodeKind::*;
        match (self, &from.kind, &to.kind) {
            (EdgeType::Used, Activity(_), Entity(_)) => true,
            (EdgeType::WasGeneratedBy, Entity(_), Activity(_)) => true,
            (EdgeType::WasAssociatedWith, Activity(_), Agent(_)) => true,
            (EdgeType::WasAttributedTo, Entity(_), Agent(_)) => true,
            (EdgeType::ActedOnBehalfOf, Agent(_), Agent(_)) => true,
            (EdgeType::WasDerivedFrom, Entity(_), Entity(_)) => true,
            (EdgeType::WasInformedBy, Activity(_), Activity(_)) => true,
            (EdgeType::HadPlan, Activity(_), Entity(_)) => to.is_plan(),
            (EdgeType::WasRevisionOf, Entity(_), Entity(_)) => from.is_plan() && to.is_plan(),
            _ => false,
        }
    }
}

impl fmt::Display for EdgeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Ord for EdgeType {
    fn cmp(&self, other: &Self) -> Ordering {
        self.as_str().cmp(other.as_str())
    }
}

impl PartialOrd for EdgeType {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    #[serde(rename = "type")]
    pub edge_type: EdgeType,
    pub from: String,
    pub to: String,
}

impl Edge {
    pub fn new(edge_type: EdgeType, from: impl Into<String>, to: impl Into<String>) -> Self {
        Edge { edge_type, from: from.into(), to: to.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoteKind {
    Note,
    DesignComment,
    Warning,
}

impl fmt::Display for NoteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoteKind::Note => "note",
            NoteKind::DesignComment => "design-comment",
            NoteKind::Warning => "warning",
        })
    }
}

/// Free-text annotation collected during planning or execution.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Note {
    pub target: String,
    pub kind: NoteKind,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<Timestamp>,
}

impl Note {
    pub fn new(target: impl Into<String>, kind: NoteKind, text: impl Into<String>) -> Self {
        Note { target: target.into(), kind, text: text.into(), author: None, timestamp: None }
    }

    pub fn by(mut self, author: impl Into<String>) -> Self {
        self.author = Some(author.into());
        self
    }
}

impl fmt::Display for Note {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.kind, self.target, self.text)?;
        if let Some(a) = &self.author {
            write!(f, " ({a})")?;
        }
        Ok(())
    }
}
