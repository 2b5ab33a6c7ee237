use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::graph::ProvGraph;
use super::model::{EdgeType, EntityCategory, Note};
use super::GraphError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    /// Leaf activities: the course of atomic steps.
    #[default]
    Fine,
    /// Top-level activities only.
    Coarse,
}

impl std::str::FromStr for Granularity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fine" => Ok(Granularity::Fine),
            "coarse" => Ok(Granularity::Coarse),
            other => Err(format!("unknown granularity {other:?} (expected fine or coarse)")),
        }
    }
}

/// One step of a derivation: an entity, the activity that generated it and
/// the agents responsible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainLink {
    pub entity: String,
    pub activity: Option<String>,
    pub agents: BTreeSet<String>,
}

impl ProvGraph {
    fn require_entity(&self, id: &str) -> Result<(), GraphError> {
        match self.node(id) {
            Some(n) if n.as_entity().is_some() => Ok(()),
            Some(_) => Err(GraphError::NotAnEntity(id.to_string())),
            None => Err(GraphError::UnknownNode(id.to_string())),
        }
    }

    fn is_device(&self, id: &str) -> bool {
        self.node(id)
            .and_then(|n| n.as_entity())
            .is_some_and(|e| e.category == EntityCategory::Device)
    }

    /// Entities `entity` directly depends on. Instruments are excluded: they
    /// are used, not consumed.
    fn inputs_of<'a>(&'a self, entity: &'a str) -> BTreeSet<&'a str> {
        let mut out: BTreeSet<&str> = self.targets(EdgeType::WasDerivedFrom, entity).collect();
        for activity in self.targets(EdgeType::WasGeneratedBy, entity) {
            out.extend(self.targets(EdgeType::Used, activity).filter(|e| !self.is_device(e)));
        }
        out
    }

    /// Entities reachable from `entity` back to its sources, origin first.
    /// Ties are broken by id; entities on a cycle follow in id order.
    fn derivation_order<'a>(&'a self, entity: &'a str) -> Vec<String> {
        let mut deps: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        let mut stack = vec![entity];
        while let Some(cur) = stack.pop() {
            if deps.contains_key(cur) {
                continue;
            }
            let inputs = self.inputs_of(cur);
            stack.extend(inputs.iter().copied());
            deps.insert(cur, inputs);
        }
        let mut order = Vec::with_capacity(deps.len());
        let mut done: BTreeSet<&str> = BTreeSet::new();
        loop {
            let next = deps
                .iter()
                .find(|(id, ds)| !done.contains(*id) && ds.iter().all(|d| done.contains(d)))
                .map(|(id, _)| *id);
            match next {
                Some(id) => {
                    done.insert(id);
                    order.push(id.to_string());
                }
                None => break,
            }
        }
        order.extend(deps.keys().filter(|id| !done.contains(*id)).map(|s| s.to_string()));
        order
    }

    pub fn derivation_chain(&self, entity: &str) -> Result<Vec<ChainLink>, GraphError> {
        self.require_entity(entity)?;
        Ok(self
            .derivation_order(entity)
            .into_iter()
            .map(|e| {
                let activity = self.targets(EdgeType::WasGeneratedBy, &e).next().map(str::to_string);
                let mut agents: BTreeSet<String> =
                    self.targets(EdgeType::WasAttributedTo, &e).map(str::to_string).collect();
                for a in self.targets(EdgeType::WasGeneratedBy, &e) {
                    agents.extend(self.targets(EdgeType::WasAssociatedWith, a).map(str::to_string));
                }
                ChainLink { entity: e, activity, agents }
            })
            .collect())
    }

    /// Activities that generated some entity on the derivation path.
    fn path_activities(&self, entity: &str) -> BTreeSet<String> {
        self.derivation_order(entity)
            .iter()
            .flat_map(|e| self.targets(EdgeType::WasGeneratedBy, e).map(str::to_string).collect::<Vec<_>>())
            .collect()
    }

    pub fn root_of<'a>(&'a self, activity: &'a str) -> &'a str {
        let mut cur = activity;
        while let Some(p) = self.parent_of(cur) {
            cur = p;
        }
        cur
    }

    pub fn leaves_under(&self, activity: &str) -> BTreeSet<String> {
        let children: Vec<&str> = self.children_of(activity).collect();
        if children.is_empty() {
            return BTreeSet::from([activity.to_string()]);
        }
        children.into_iter().flat_map(|c| self.leaves_under(c)).collect()
    }

    /// All activities nested under `activity`, including itself.
    pub fn descendants_of(&self, activity: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::from([activity.to_string()]);
        for c in self.children_of(activity) {
            out.extend(self.descendants_of(c));
        }
        out
    }

    /// Sorts activity ids by start time (unknown last), then id.
    pub fn chronological(&self, activities: impl IntoIterator<Item = String>) -> Vec<String> {
        let mut v: Vec<String> = activities.into_iter().collect();
        v.sort_by_key(|id| {
            let start = self.node(id).and_then(|n| n.as_activity()).and_then(|a| a.start);
            (start.is_none(), start, id.clone())
        });
        v.dedup();
        v
    }

    pub fn activity_trace(&self, entity: &str, granularity: Granularity) -> Result<Vec<String>, GraphError> {
        self.require_entity(entity)?;
        let path = self.path_activities(entity);
        let selected: BTreeSet<String> = match granularity {
            Granularity::Coarse => path.iter().map(|a| self.root_of(a).to_string()).collect(),
            Granularity::Fine => path.iter().flat_map(|a| self.leaves_under(a)).collect(),
        };
        Ok(self.chronological(selected))
    }

    /// The revision chain through `plan`, oldest first.
    pub fn plan_revisions(&self, plan: &str) -> Result<Vec<String>, GraphError> {
        match self.node(plan) {
            Some(n) if n.is_plan() => {}
            Some(_) => return Err(GraphError::NotAPlan(plan.to_string())),
            None => return Err(GraphError::UnknownNode(plan.to_string())),
        }
        let single = |ids: Vec<&str>, at: &str| -> Result<Option<String>, GraphError> {
            match ids.as_slice() {
                [] => Ok(None),
                [one] => Ok(Some(one.to_string())),
                _ => Err(GraphError::AmbiguousRevisionChain(at.to_string())),
            }
        };
        let mut older = Vec::new();
        let mut cur = plan.to_string();
        while let Some(prev) = single(self.targets(EdgeType::WasRevisionOf, &cur).collect(), &cur)? {
            older.push(prev.clone());
            cur = prev;
        }
        let mut chain: Vec<String> = older.into_iter().rev().collect();
        chain.push(plan.to_string());
        let mut cur = plan.to_string();
        while let Some(next) = single(self.sources(EdgeType::WasRevisionOf, &cur).collect(), &cur)? {
            chain.push(next.clone());
            cur = next;
        }
        Ok(chain)
    }

    /// Every agent associated with `activities` or credited with `entities`,
    /// closed under delegation.
    pub fn responsible_agents<'a>(
        &self,
        activities: impl IntoIterator<Item = &'a str>,
        entities: impl IntoIterator<Item = &'a str>,
    ) -> BTreeSet<String> {
        let mut agents: BTreeSet<String> = BTreeSet::new();
        for a in activities {
            agents.extend(self.targets(EdgeType::WasAssociatedWith, a).map(str::to_string));
        }
        for e in entities {
            agents.extend(self.targets(EdgeType::WasAttributedTo, e).map(str::to_string));
        }
        let mut stack: Vec<String> = agents.iter().cloned().collect();
        while let Some(agent) = stack.pop() {
            for boss in self.targets(EdgeType::ActedOnBehalfOf, &agent) {
                if agents.insert(boss.to_string()) {
                    stack.push(boss.to_string());
                }
            }
        }
        agents
    }

    /// Device entities used by `activities`.
    pub fn devices_used<'a>(&self, activities: impl IntoIterator<Item = &'a str>) -> BTreeSet<String> {
        activities
            .into_iter()
            .flat_map(|a| self.targets(EdgeType::Used, a).filter(|e| self.is_device(e)).map(str::to_string).collect::<Vec<_>>())
            .collect()
    }

    pub fn plans_of<'a>(&self, activities: impl IntoIterator<Item = &'a str>) -> BTreeSet<String> {
        activities
            .into_iter()
            .flat_map(|a| self.targets(EdgeType::HadPlan, a).map(str::to_string).collect::<Vec<_>>())
            .collect()
    }

    pub fn notes_on<'a>(&'a self, nodes: &'a BTreeSet<String>) -> impl Iterator<Item = &'a Note> + 'a {
        self.notes.iter().filter(move |n| nodes.contains(&n.target))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workflow::{Activity, AgentKind, Edge, Entity, Node};

    fn ts(s: &str) -> crate::workflow::Timestamp {
        s.parse().unwrap()
    }

    /// raw <- clean <- report, with a device and a nested activity tree.
    fn pipeline() -> ProvGraph {
        let mut g = ProvGraph::new();
        g.add_node(Node::agent("bob", AgentKind::Person)).unwrap();
        g.add_node(Node::agent("uni", AgentKind::Organization)).unwrap();
        g.add_node(Node::agent("tool", AgentKind::Software)).unwrap();
        g.add_node(Node::activity("study", Activity::new())).unwrap();
        g.add_node(Node::activity("collect", Activity::new().within("study").during(ts("2024-03-01T09:00:00Z"), ts("2024-03-01T10:00:00Z")))).unwrap();
        g.add_node(Node::activity("process", Activity::new().within("study"))).unwrap();
        g.add_node(Node::activity("filter", Activity::new().within("process").during(ts("2024-03-02T09:00:00Z"), ts("2024-03-02T09:30:00Z")))).unwrap();
        g.add_node(Node::activity("merge", Activity::new().within("process").during(ts("2024-03-01T12:00:00Z"), ts("2024-03-01T13:00:00Z")))).unwrap();
        g.add_node(Node::activity("publish", Activity::new())).unwrap();
        for (id, cat) in [
            ("raw", EntityCategory::Data),
            ("clean", EntityCategory::Data),
            ("report", EntityCategory::Document),
            ("scale", EntityCategory::Device),
            ("v1", EntityCategory::Plan),
            ("v2", EntityCategory::Plan),
            ("v3", EntityCategory::Plan),
        ] {
            g.add_node(Node::entity(id, Entity::new(cat))).unwrap();
        }
        for (ty, f, t) in [
            (EdgeType::WasGeneratedBy, "raw", "collect"),
            (EdgeType::Used, "collect", "scale"),
            (EdgeType::WasGeneratedBy, "clean", "process"),
            (EdgeType::Used, "process", "raw"),
            (EdgeType::WasGeneratedBy, "report", "publish"),
            (EdgeType::WasDerivedFrom, "report", "clean"),
            (EdgeType::WasAssociatedWith, "collect", "bob"),
            (EdgeType::WasAssociatedWith, "process", "tool"),
            (EdgeType::WasAttributedTo, "report", "bob"),
            (EdgeType::ActedOnBehalfOf, "bob", "uni"),
            (EdgeType::HadPlan, "study", "v2"),
            (EdgeType::WasRevisionOf, "v2", "v1"),
            (EdgeType::WasRevisionOf, "v3", "v2"),
        ] {
            g.add_edge(Edge::new(ty, f, t)).unwrap();
        }
        g
    }

    #[test]
    fn chain_is_origin_first_without_devices() {
        let g = pipeline();
        let chain = g.derivation_chain("report").unwrap();
        let ids: Vec<&str> = chain.iter().map(|l| l.entity.as_str()).collect();
        assert_eq!(ids, ["raw", "clean", "report"]);
        assert_eq!(chain[0].activity.as_deref(), Some("collect"));
        assert_eq!(chain[1].agents, BTreeSet::from(["tool".to_string()]));
        assert_eq!(chain[2].agents, BTreeSet::from(["bob".to_string()]));
    }

    #[test]
    fn chain_of_source_entity_is_itself() {
        let g = pipeline();
        let chain = g.derivation_chain("scale").unwrap();
        assert_eq!(chain, vec![ChainLink { entity: "scale".into(), activity: None, agents: BTreeSet::new() }]);
        assert_eq!(g.derivation_chain("bob"), Err(GraphError::NotAnEntity("bob".into())));
    }

    #[test]
    fn trace_granularity() {
        let g = pipeline();
        // Fine: leaves by start time, untimed last.
        assert_eq!(g.activity_trace("report", Granularity::Fine).unwrap(), ["collect", "merge", "filter", "publish"]);
        assert_eq!(g.activity_trace("report", Granularity::Coarse).unwrap(), ["publish", "study"]);
        assert_eq!(g.activity_trace("raw", Granularity::Coarse).unwrap(), ["study"]);
    }

    #[test]
    fn revisions_from_any_member() {
        let g = pipeline();
        for p in ["v1", "v2", "v3"] {
            assert_eq!(g.plan_revisions(p).unwrap(), ["v1", "v2", "v3"]);
        }
        assert_eq!(g.plan_revisions("raw"), Err(GraphError::NotAPlan("raw".into())));
    }

    #[test]
    fn forked_revisions_are_ambiguous() {
        let mut g = pipeline();
        g.add_node(Node::entity("v3b", Entity::new(EntityCategory::Plan))).unwrap();
        g.add_edge(Edge::new(EdgeType::WasRevisionOf, "v3b", "v2")).unwrap();
        assert_eq!(g.plan_revisions("v1"), Err(GraphError::AmbiguousRevisionChain("v2".into())));
    }

    #[test]
    fn helper_queries() {
        let g = pipeline();
        let agents = g.responsible_agents(["collect"], ["report"]);
        assert_eq!(agents, BTreeSet::from(["bob".to_string(), "uni".to_string()]));
        assert_eq!(g.devices_used(["collect", "process"]), BTreeSet::from(["scale".to_string()]));
        assert_eq!(g.plans_of(["study"]), BTreeSet::from(["v2".to_string()]));
        assert_eq!(g.descendants_of("process").len(), 3);
        assert_eq!(g.root_of("filter"), "study");
    }
}
