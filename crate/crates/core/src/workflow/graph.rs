use std::collections::{BTreeMap, BTreeSet};

use super::model::{Edge, EdgeType, Node, NodeKind, Note};
use super::GraphError;

/// A PROV-style multigraph of agents, activities and entities.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProvGraph {
    pub(super) nodes: BTreeMap<String, Node>,
    pub(super) edges: BTreeSet<Edge>,
    /// Kept sorted.
    pub(super) notes: Vec<Note>,
}

fn valid_node_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | ':' | '/'))
}

impl ProvGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }

    pub fn notes(&self) -> &[Note] {
        &self.notes
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn add_node(&mut self, node: Node) -> Result<(), GraphError> {
        self.check_node(&node)?;
        if let NodeKind::Activity(a) = &node.kind {
            if let Some(parent) = &a.parent {
                match self.nodes.get(parent) {
                    Some(p) if p.as_activity().is_some() => {}
                    Some(_) => return Err(GraphError::InvalidParent { activity: node.id.clone(), parent: parent.clone() }),
                    None => return Err(GraphError::UnknownNode(parent.clone())),
                }
            }
        }
        self.nodes.insert(node.id.clone(), node);
        Ok(())
    }

    /// Per-node checks that do not depend on other nodes.
    pub(super) fn check_node(&self, node: &Node) -> Result<(), GraphError> {
        if !valid_node_id(&node.id) {
            return Err(GraphError::InvalidId(node.id.clone()));
        }
        if self.nodes.contains_key(&node.id) {
            return Err(GraphError::DuplicateNode(node.id.clone()));
        }
        if let NodeKind::Activity(a) = &node.kind {
            if let (Some(start), Some(end)) = (a.start, a.end) {
                if end < start {
                    return Err(GraphError::EndBeforeStart(node.id.clone()));
                }
            }
            if a.parent.as_deref() == Some(node.id.as_str()) {
                return Err(GraphError::NestingCycle(node.id.clone()));
            }
        }
        Ok(())
    }

    pub fn add_edge(&mut self, edge: Edge) -> Result<(), GraphError> {
        let from = self.nodes.get(&edge.from).ok_or_else(|| GraphError::UnknownNode(edge.from.clone()))?;
        let to = self.nodes.get(&edge.to).ok_or_else(|| GraphError::UnknownNode(edge.to.clone()))?;
        if !edge.edge_type.admits(from, to) {
            return Err(GraphError::KindViolation {
                edge_type: edge.edge_type,
                from: format!("{} {}", from.kind.label(), from.id),
                to: format!("{} {}", to.kind.label(), to.id),
            });
        }
        if self.edges.contains(&edge) {
            return Err(GraphError::DuplicateEdge {
                edge_type: edge.edge_type,
                from: edge.from.clone(),
                to: edge.to.clone(),
            });
        }
        if edge.edge_type == EdgeType::WasRevisionOf
            && (edge.from == edge.to || self.reaches(EdgeType::WasRevisionOf, &edge.to, &edge.from))
        {
            return Err(GraphError::RevisionCycle(edge.from.clone()));
        }
        self.edges.insert(edge);
        Ok(())
    }

    pub fn attach_note(&mut self, note: Note) -> Result<(), GraphError> {
        if !self.nodes.contains_key(&note.target) {
            return Err(GraphError::UnknownNode(note.target.clone()));
        }
        if let Some(author) = &note.author {
            match self.nodes.get(author) {
                Some(n) if n.is_agent() => {}
                Some(_) => return Err(GraphError::AuthorNotAgent(author.clone())),
                None => return Err(GraphError::UnknownNode(author.clone())),
            }
        }
        let at = self.notes.partition_point(|n| n <= &note);
        self.notes.insert(at, note);
        Ok(())
    }

    /// Whether `to` is reachable from `from` following edges of `edge_type`.
    fn reaches(&self, edge_type: EdgeType, from: &str, to: &str) -> bool {
        let mut stack = vec![from.to_string()];
        let mut seen = BTreeSet::new();
        while let Some(cur) = stack.pop() {
            if cur == to {
                return true;
            }
            if seen.insert(cur.clone()) {
                stack.extend(self.targets(edge_type, &cur).map(str::to_string));
            }
        }
        false
    }

    /// Ends of `edge_type` edges leaving `from`, in id order.
    pub fn targets<'a>(&'a self, edge_type: EdgeType, from: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .iter()
            .filter(move |e| e.edge_type == edge_type && e.from == from)
            .map(|e| e.to.as_str())
    }

    /// Starts of `edge_type` edges arriving at `to`, in id order.
    pub fn sources<'a>(&'a self, edge_type: EdgeType, to: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .iter()
            .filter(move |e| e.edge_type == edge_type && e.to == to)
            .map(|e| e.from.as_str())
    }

    pub fn parent_of(&self, activity: &str) -> Option<&str> {
        self.nodes.get(activity)?.as_activity()?.parent.as_deref()
    }

    pub fn children_of<'a>(&'a self, activity: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.nodes
            .values()
            .filter(move |n| n.as_activity().and_then(|a| a.parent.as_deref()) == Some(activity))
            .map(|n| n.id.as_str())
    }

    /// Full invariant check over an assembled graph.
    pub fn validate(&self) -> Result<(), GraphError> {
        for node in self.nodes.values() {
            if let Some(a) = node.as_activity() {
                if let Some(parent) = &a.parent {
                    match self.nodes.get(parent) {
                        Some(p) if p.as_activity().is_some() => {}
                        Some(_) => {
                            return Err(GraphError::InvalidParent { activity: node.id.clone(), parent: parent.clone() })
                        }
                        None => return Err(GraphError::UnknownNode(parent.clone())),
                    }
                }
                // Walking up from any activity must terminate.
                let mut seen = BTreeSet::from([node.id.as_str()]);
                let mut cur = node.id.as_str();
                while let Some(p) = self.parent_of(cur) {
                    if !seen.insert(p) {
                        return Err(GraphError::NestingCycle(node.id.clone()));
                    }
                    cur = p;
                }
            }
        }
        Ok(())
    }
}
