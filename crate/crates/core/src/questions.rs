//! The eight provenance questions (what, when, where, who, which, how, why
//! and why-not) answered over data, workflow, or both.
//!
//! Data questions are answered from an annotated query result, workflow
//! questions from the graph around an entity, and combined questions walk
//! from result rows to files to workflow entities through the ID database.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::annotations::{Polynomial, WitnessBasis};
use crate::bridge::{BridgeError, IdDatabase};
use crate::data_model::Snapshot;
use crate::query::{evaluate, why_not, AlgebraExpr, Column, Expectation, QueryError, SourceCell, WhyNotExplanation};
use crate::workflow::{ChainLink, GraphError, Granularity, Note, ProvGraph, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionKind {
    What,
    When,
    Where,
    Who,
    Which,
    How,
    Why,
    WhyNot,
}

impl QuestionKind {
    pub const ALL: [QuestionKind; 8] = [
        QuestionKind::What,
        QuestionKind::When,
        QuestionKind::Where,
        QuestionKind::Who,
        QuestionKind::Which,
        QuestionKind::How,
        QuestionKind::Why,
        QuestionKind::WhyNot,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QuestionKind::What => "what",
            QuestionKind::When => "when",
            QuestionKind::Where => "where",
            QuestionKind::Who => "who",
            QuestionKind::Which => "which",
            QuestionKind::How => "how",
            QuestionKind::Why => "why",
            QuestionKind::WhyNot => "why_not",
        }
    }

    /// Kinds that only make sense for workflow provenance.
    pub fn workflow_only(self) -> bool {
        matches!(self, QuestionKind::When | QuestionKind::Who | QuestionKind::Which)
    }
}

impl fmt::Display for QuestionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QuestionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        if let Some(k) = QuestionKind::ALL.into_iter().find(|k| k.as_str() == norm) {
            return Ok(k);
        }
        match norm.strip_suffix("_not") {
            Some(base) if QuestionKind::ALL.iter().any(|k| k.as_str() == base) => {
                Err(format!("negated question {s:?} is not supported; only why_not is"))
            }
            _ => Err(format!("unknown question kind {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Data,
    Workflow,
    Combined,
}

impl Scope {
    pub const ALL: [Scope; 3] = [Scope::Data, Scope::Workflow, Scope::Combined];
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scope::Data => "data",
            Scope::Workflow => "workflow",
            Scope::Combined => "combined",
        })
    }
}

impl FromStr for Scope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "data" => Ok(Scope::Data),
            "workflow" => Ok(Scope::Workflow),
            "combined" => Ok(Scope::Combined),
            other => Err(format!("unknown scope {other:?} (expected data, workflow or combined)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Subject {
    /// Row `row` of the result of `query`; `attribute` selects a column.
    Row { query: AlgebraExpr, row: usize, attribute: Option<String> },
    /// A workflow entity.
    Entity(String),
    /// A row the user expected from `query`.
    Expectation { query: AlgebraExpr, expectation: Expectation },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Question {
    pub kind: QuestionKind,
    pub scope: Scope,
    pub subject: Subject,
    pub granularity: Granularity,
}

impl Question {
    pub fn new(kind: QuestionKind, scope: Scope, subject: Subject) -> Self {
        Question { kind, scope, subject, granularity: Granularity::Fine }
    }

    pub fn coarse(mut self) -> Self {
        self.granularity = Granularity::Coarse;
        self
    }
}

/// What a question is answered against. Each scope needs different parts.
#[derive(Debug, Clone, Copy, Default)]
pub struct Context<'a> {
    pub snapshot: Option<&'a Snapshot>,
    pub graph: Option<&'a ProvGraph>,
    pub ids: Option<&'a IdDatabase>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuestionError {
    #[error("{0} is only defined for workflow provenance")]
    UnsupportedScope(QuestionKind),
    #[error("{0} is required to answer this question")]
    MissingContext(&'static str),
    #[error("invalid subject: {0}")]
    InvalidSubject(String),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Bridge(#[from] BridgeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanLineage {
    pub plan: String,
    pub revisions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Location {
    pub node: String,
    pub location: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TimedActivity {
    pub activity: String,
    pub start: Option<Timestamp>,
    pub end: Option<Timestamp>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntityTrace {
    pub entity: String,
    pub answer: Answer,
    pub chain: Vec<ChainLink>,
}

/// Rows to files to entities to activities to agents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinedTrace {
    /// The data-scope answer, absent for workflow-only kinds.
    pub data: Option<Answer>,
    /// File-level provenance of the row.
    #[serde(serialize_with = "crate::render::opt_as_display")]
    pub lifted: Option<Polynomial>,
    pub files: Vec<String>,
    pub entities: Vec<EntityTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Answer {
    Polynomial(#[serde(serialize_with = "crate::render::as_display")] Polynomial),
    WitnessBasis(WitnessBasis),
    WhereSet(BTreeSet<SourceCell>),
    TypeMap(Vec<Column>),
    WhyNot(WhyNotExplanation),
    Activities(Vec<String>),
    Plans(Vec<PlanLineage>),
    Locations(Vec<Location>),
    Timestamps(Vec<TimedActivity>),
    Agents(Vec<String>),
    Devices(Vec<String>),
    Notes(Vec<Note>),
    Combined(Box<CombinedTrace>),
}

fn list(f: &mut fmt::Formatter<'_>, title: &str, items: &[String]) -> fmt::Result {
    writeln!(f, "{title}:")?;
    if items.is_empty() {
        return writeln!(f, "  (none)");
    }
    items.iter().try_for_each(|i| writeln!(f, "  {i}"))
}

fn stamp(t: &Option<Timestamp>) -> String {
    t.map_or_else(|| "?".to_string(), |t| t.to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Polynomial(p) => writeln!(f, "polynomial: {p}"),
            Answer::WitnessBasis(b) => writeln!(f, "witness basis: {b}"),
            Answer::WhereSet(cells) => list(f, "source cells", &cells.iter().map(ToString::to_string).collect::<Vec<_>>()),
            Answer::TypeMap(cols) => {
                let lines: Vec<String> = cols
                    .iter()
                    .map(|c| {
                        let srcs: Vec<&str> = c.sources.iter().map(String::as_str).collect();
                        format!("{}: {} from {{{}}}", c.name, c.ty, srcs.join(","))
                    })
                    .collect();
                list(f, "attribute types", &lines)
            }
            Answer::WhyNot(w) => {
                let lines: Vec<String> = w.findings.iter().map(ToString::to_string).collect();
                list(f, "why-not findings", &lines)
            }
            Answer::Activities(a) => list(f, "activities", a),
            Answer::Plans(plans) => {
                let lines: Vec<String> =
                    plans.iter().map(|p| format!("{} (revisions: {})", p.plan, p.revisions.join(" -> "))).collect();
                list(f, "plans", &lines)
            }
            Answer::Locations(locs) => {
                list(f, "locations", &locs.iter().map(|l| format!("{}: {}", l.node, l.location)).collect::<Vec<_>>())
            }
            Answer::Timestamps(ts) => {
                let lines: Vec<String> =
                    ts.iter().map(|t| format!("{}: {} .. {}", t.activity, stamp(&t.start), stamp(&t.end))).collect();
                list(f, "timestamps", &lines)
            }
            Answer::Agents(a) => list(f, "agents", a),
            Answer::Devices(d) => list(f, "devices", d),
            Answer::Notes(n) => list(f, "notes", &n.iter().map(ToString::to_string).collect::<Vec<_>>()),
            Answer::Combined(c) => {
                if let Some(data) = &c.data {
                    write!(f, "{data}")?;
                }
                if let Some(l) = &c.lifted {
                    writeln!(f, "file-level polynomial: {l}")?;
                }
                list(f, "files", &c.files)?;
                for e in &c.entities {
                    writeln!(f, "entity {}:", e.entity)?;
                    for line in e.answer.to_string().lines() {
                        writeln!(f, "  {line}")?;
                    }
                    writeln!(f, "  derivation chain:")?;
                    for link in &e.chain {
                        let agents: Vec<&str> = link.agents.iter().map(String::as_str).collect();
                        writeln!(
                            f,
                            "    {} <- {} [{}]",
                            link.entity,
                            link.activity.as_deref().unwrap_or("-"),
                            agents.join(", ")
                        )?;
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    kind: QuestionKind,
    scope: Scope,
    answer: &'a Answer,
}

/// `{"kind", "scope", "answer"}` as pretty JSON.
pub fn answer_json(question: &Question, answer: &Answer) -> String {
    let env = Envelope { kind: question.kind, scope: question.scope, answer };
    serde_json::to_string_pretty(&env).expect("answers always serialize")
}

pub fn ask(question: &Question, ctx: &Context<'_>) -> Result<Answer, QuestionError> {
    match question.scope {
        Scope::Data => ask_data(question, ctx),
        Scope::Workflow => match &question.subject {
            Subject::Entity(e) => ask_workflow(question.kind, e, question.granularity, need_graph(ctx)?),
            _ => Err(QuestionError::InvalidSubject("workflow questions are about an entity".into())),
        },
        Scope::Combined => ask_combined(question, ctx),
    }
}

fn need_snapshot<'a>(ctx: &Context<'a>) -> Result<&'a Snapshot, QuestionError> {
    ctx.snapshot.ok_or(QuestionError::MissingContext("a database snapshot"))
}

fn need_graph<'a>(ctx: &Context<'a>) -> Result<&'a ProvGraph, QuestionError> {
    ctx.graph.ok_or(QuestionError::MissingContext("a workflow graph"))
}

fn need_ids<'a>(ctx: &Context<'a>) -> Result<&'a IdDatabase, QuestionError> {
    ctx.ids.ok_or(QuestionError::MissingContext("an ID database"))
}

fn ask_data(q: &Question, ctx: &Context<'_>) -> Result<Answer, QuestionError> {
    if q.kind.workflow_only() {
        return Err(QuestionError::UnsupportedScope(q.kind));
    }
    let snapshot = need_snapshot(ctx)?;
    if q.kind == QuestionKind::WhyNot {
        let Subject::Expectation { query, expectation } = &q.subject else {
            return Err(QuestionError::InvalidSubject("why_not needs an expected row".into()));
        };
        return Ok(Answer::WhyNot(why_not(query, snapshot, expectation)?));
    }
    let Subject::Row { query, row, attribute } = &q.subject else {
        return Err(QuestionError::InvalidSubject(format!("{} on data needs a result row", q.kind)));
    };
    let result = evaluate(query, snapshot)?;
    let found = result.row(*row)?;
    let coarse = q.granularity == Granularity::Coarse;
    Ok(match q.kind {
        QuestionKind::How if coarse => Answer::Polynomial(need_ids(ctx)?.lift(&found.polynomial)?),
        QuestionKind::How => Answer::Polynomial(found.polynomial.clone()),
        QuestionKind::Why if coarse => Answer::WitnessBasis(need_ids(ctx)?.lift_basis(&found.polynomial.to_witness_basis())?),
        QuestionKind::Why => Answer::WitnessBasis(found.polynomial.to_witness_basis()),
        QuestionKind::Where => {
            let attr = attribute
                .as_deref()
                .ok_or_else(|| QuestionError::InvalidSubject("where on data needs an attribute".into()))?;
            Answer::WhereSet(result.where_provenance(*row, attr)?.clone())
        }
        QuestionKind::What => {
            let cols = result.what_provenance();
            match attribute {
                Some(a) => {
                    let col = cols.iter().find(|c| &c.name == a).ok_or_else(|| QueryError::UnknownAttribute(a.clone()))?;
                    Answer::TypeMap(vec![col.clone()])
                }
                None => Answer::TypeMap(cols.to_vec()),
            }
        }
        QuestionKind::When | QuestionKind::Who | QuestionKind::Which | QuestionKind::WhyNot => unreachable!(),
    })
}

/// Activities a question about `entity` looks at: the generating
/// activities and everything enclosing them, or only the top level.
fn scope_activities(graph: &ProvGraph, entity: &str, granularity: Granularity) -> Result<BTreeSet<String>, GraphError> {
    let fine = graph.activity_trace(entity, Granularity::Fine)?;
    Ok(match granularity {
        Granularity::Coarse => fine.iter().map(|a| graph.root_of(a).to_string()).collect(),
        Granularity::Fine => {
            let mut out = BTreeSet::new();
            for a in &fine {
                let mut cur = Some(a.as_str());
                while let Some(c) = cur {
                    out.insert(c.to_string());
                    cur = graph.parent_of(c);
                }
            }
            out
        }
    })
}

fn ask_workflow(kind: QuestionKind, entity: &str, granularity: Granularity, graph: &ProvGraph) -> Result<Answer, QuestionError> {
    let chain = graph.derivation_chain(entity)?;
    let entities: Vec<&str> = chain.iter().map(|l| l.entity.as_str()).collect();
    let scoped = scope_activities(graph, entity, granularity)?;
    let scoped_refs = || scoped.iter().map(String::as_str);
    Ok(match kind {
        QuestionKind::What => Answer::Activities(graph.activity_trace(entity, Granularity::Fine)?),
        QuestionKind::How => Answer::Activities(graph.activity_trace(entity, granularity)?),
        QuestionKind::Why => {
            let plans = graph.plans_of(scoped_refs());
            let lineages = plans
                .into_iter()
                .map(|p| Ok(PlanLineage { revisions: graph.plan_revisions(&p)?, plan: p }))
                .collect::<Result<Vec<_>, GraphError>>()?;
            Answer::Plans(lineages)
        }
        QuestionKind::Where => {
            let mut nodes: Vec<String> = graph.chronological(scoped.iter().cloned());
            nodes.extend(entities.iter().map(|e| e.to_string()));
            Answer::Locations(
                nodes
                    .into_iter()
                    .filter_map(|n| {
                        let loc = graph.node(&n)?.attribute("location")?.to_string();
                        Some(Location { node: n, location: loc })
                    })
                    .collect(),
            )
        }
        QuestionKind::When => Answer::Timestamps(
            graph
                .activity_trace(entity, granularity)?
                .into_iter()
                .map(|a| {
                    let act = graph.node(&a).and_then(|n| n.as_activity());
                    TimedActivity {
                        start: act.and_then(|x| x.start),
                        end: act.and_then(|x| x.end),
                        activity: a,
                    }
                })
                .collect(),
        ),
        QuestionKind::Who => Answer::Agents(graph.responsible_agents(scoped_refs(), entities.iter().copied()).into_iter().collect()),
        QuestionKind::Which => {
            let all: BTreeSet<String> = scoped.iter().flat_map(|a| graph.descendants_of(a)).collect();
            Answer::Devices(graph.devices_used(all.iter().map(String::as_str)).into_iter().collect())
        }
        QuestionKind::WhyNot => {
            let mut nodes: BTreeSet<String> = scoped.iter().flat_map(|a| graph.descendants_of(a)).collect();
            let plans = graph.plans_of(scoped_refs());
            for p in &plans {
                nodes.extend(graph.plan_revisions(p)?);
            }
            nodes.extend(entities.iter().map(|e| e.to_string()));
            Answer::Notes(graph.notes_on(&nodes).cloned().collect())
        }
    })
}

fn ask_combined(q: &Question, ctx: &Context<'_>) -> Result<Answer, QuestionError> {
    let snapshot = need_snapshot(ctx)?;
    let graph = need_graph(ctx)?;
    let ids = need_ids(ctx)?;
    let data = if q.kind.workflow_only() {
        None
    } else {
        Some(ask_data(&Question { scope: Scope::Data, ..q.clone() }, ctx)?)
    };
    let (lifted, files): (Option<Polynomial>, BTreeSet<String>) = match &q.subject {
        Subject::Row { query, row, .. } => {
            let result = evaluate(query, snapshot)?;
            let p = &result.row(*row)?.polynomial;
            let files = p
                .variables()
                .iter()
                .map(|v| ids.resolve(v).map(|r| r.file_id.clone()))
                .collect::<Result<_, _>>()?;
            (Some(ids.lift(p)?), files)
        }
        Subject::Expectation { query, .. } => {
            let relations = query.scans();
            let files = ids
                .records()
                .filter(|r| relations.iter().any(|s| *s == r.relation))
                .map(|r| r.file_id.clone())
                .collect();
            (None, files)
        }
        Subject::Entity(_) => {
            return Err(QuestionError::InvalidSubject("combined questions start from a query".into()));
        }
    };
    let linked: BTreeSet<String> = files
        .iter()
        .filter_map(|f| ids.record(f).and_then(|r| r.workflow_entity.clone()))
        .collect();
    let entities = linked
        .into_iter()
        .map(|e| {
            Ok(EntityTrace {
                answer: ask_workflow(q.kind, &e, q.granularity, graph)?,
                chain: graph.derivation_chain(&e)?,
                entity: e,
            })
        })
        .collect::<Result<Vec<_>, QuestionError>>()?;
    Ok(Answer::Combined(Box::new(CombinedTrace { data, lifted, files: files.into_iter().collect(), entities })))
}
