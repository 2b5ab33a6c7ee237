//! JSON document form of a [`ProvGraph`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::graph::ProvGraph;
use super::model::{Activity, AgentKind, Edge, Entity, EntityCategory, Node, NodeKind, Note, Timestamp};
use super::GraphError;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentRecord {
    id: String,
    kind: AgentKind,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActivityRecord {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    start: Option<Timestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    end: Option<Timestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parent: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    attributes: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntityRecord {
    id: String,
    category: EntityCategory,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    attributes: BTreeMap<String, String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDocument {
    agents: Vec<AgentRecord>,
    activities: Vec<ActivityRecord>,
    entities: Vec<EntityRecord>,
    edges: Vec<Edge>,
    notes: Vec<Note>,
}

impl ProvGraph {
    /// Deterministic JSON: node sections sorted by id, then edges sorted by
    /// (type, from, to), then notes.
    pub fn serialize(&self) -> String {
        let mut doc = GraphDocument::default();
        for node in self.nodes.values() {
            match &node.kind {
                NodeKind::Agent(kind) => doc.agents.push(AgentRecord { id: node.id.clone(), kind: *kind }),
                NodeKind::Activity(a) => doc.activities.push(ActivityRecord {
                    id: node.id.clone(),
                    start: a.start,
                    end: a.end,
                    parent: a.parent.clone(),
                    attributes: a.attributes.clone(),
                }),
                NodeKind::Entity(e) => doc.entities.push(EntityRecord {
                    id: node.id.clone(),
                    category: e.category,
                    attributes: e.attributes.clone(),
                }),
            }
        }
        doc.edges = self.edges.iter().cloned().collect();
        doc.notes = self.notes.clone();
        let mut out = serde_json::to_string_pretty(&doc).expect("graph documents always serialize");
        out.push('\n');
        out
    }

    pub fn deserialize(text: &str) -> Result<ProvGraph, GraphError> {
        let doc: GraphDocument = serde_json::from_str(text).map_err(|e| GraphError::Malformed(e.to_string()))?;
        let mut graph = ProvGraph::new();
        let agents = doc.agents.into_iter().map(|r| Node::agent(r.id, r.kind));
        let activities = doc.activities.into_iter().map(|r| {
            Node::activity(
                r.id,
                Activity { start: r.start, end: r.end, parent: r.parent, attributes: r.attributes },
            )
        });
        let entities = doc
            .entities
            .into_iter()
            .map(|r| Node::entity(r.id, Entity { category: r.category, attributes: r.attributes }));
        // Parents may appear after their children, so link checks wait for validate().
        for node in agents.chain(activities).chain(entities) {
            graph.check_node(&node)?;
            graph.nodes.insert(node.id.clone(), node);
        }
        graph.validate()?;
        for edge in doc.edges {
            graph.add_edge(edge)?;
        }
        for note in doc.notes {
            graph.attach_note(note)?;
        }
        Ok(graph)
    }
}
