use std::collections::BTreeMap;

use unprov_core::bridge::IdDatabase;
use unprov_core::data_model::{Snapshot, Value};
use unprov_core::fixtures;
use unprov_core::query::parse_query;
use unprov_core::questions::{
    answer_json, ask, Answer, Context, Location, PlanLineage, Question, QuestionError, QuestionKind, Scope, Subject,
};
use unprov_core::workflow::{Granularity, ProvGraph};

struct World {
    snap: Snapshot,
    graph: ProvGraph,
    ids: IdDatabase,
}

impl World {
    fn new() -> Self {
        World { snap: fixtures::database().live(), graph: fixtures::graph(), ids: fixtures::id_database() }
    }

    fn ctx(&self) -> Context<'_> {
        Context { snapshot: Some(&self.snap), graph: Some(&self.graph), ids: Some(&self.ids) }
    }
}

fn row_subject(attribute: Option<&str>) -> Subject {
    Subject::Row {
        query: parse_query(fixtures::COMPARISON_QUERY).unwrap(),
        row: 0,
        attribute: attribute.map(str::to_string),
    }
}

fn expectation_subject() -> Subject {
    Subject::Expectation {
        query: parse_query(fixtures::COMPARISON_QUERY).unwrap(),
        expectation: BTreeMap::from([("voltage_2".to_string(), Value::decimal_literal("1.3").unwrap())]),
    }
}

fn subject_for(kind: QuestionKind, scope: Scope) -> Subject {
    match (kind, scope) {
        (_, Scope::Workflow) => Subject::Entity("dataset-R".into()),
        (QuestionKind::WhyNot, _) => expectation_subject(),
        _ => row_subject(Some("voltage_2")),
    }
}

fn variant(a: &Answer) -> &'static str {
    match a {
        Answer::Polynomial(_) => "polynomial",
        Answer::WitnessBasis(_) => "witness_basis",
        Answer::WhereSet(_) => "where_set",
        Answer::TypeMap(_) => "type_map",
        Answer::WhyNot(_) => "why_not",
        Answer::Activities(_) => "activities",
        Answer::Plans(_) => "plans",
        Answer::Locations(_) => "locations",
        Answer::Timestamps(_) => "timestamps",
        Answer::Agents(_) => "agents",
        Answer::Devices(_) => "devices",
        Answer::Notes(_) => "notes",
        Answer::Combined(_) => "combined",
    }
}

fn documented(kind: QuestionKind, scope: Scope) -> Option<&'static str> {
    use QuestionKind::*;
    Some(match (scope, kind) {
        (Scope::Data, When | Who | Which) => return None,
        (Scope::Data, What) => "type_map",
        (Scope::Data, Where) => "where_set",
        (Scope::Data, How) => "polynomial",
        (Scope::Data, Why) => "witness_basis",
        (Scope::Data, WhyNot) => "why_not",
        (Scope::Workflow, What | How) => "activities",
        (Scope::Workflow, When) => "timestamps",
        (Scope::Workflow, Where) => "locations",
        (Scope::Workflow, Who) => "agents",
        (Scope::Workflow, Which) => "devices",
        (Scope::Workflow, Why) => "plans",
        (Scope::Workflow, WhyNot) => "notes",
        (Scope::Combined, _) => "combined",
    })
}

#[test]
fn every_kind_and_scope_is_handled() {
    let w = World::new();
    let mut checked = 0;
    for kind in QuestionKind::ALL {
        for scope in Scope::ALL {
            let q = Question::new(kind, scope, subject_for(kind, scope));
            match (ask(&q, &w.ctx()), documented(kind, scope)) {
                (Ok(a), Some(v)) => assert_eq!(variant(&a), v, "{kind}/{scope}"),
                (Err(QuestionError::UnsupportedScope(k)), None) => assert_eq!(k, kind),
                (other, doc) => panic!("{kind}/{scope}: got {other:?}, documented {doc:?}"),
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 24);
}

#[test]
fn unsupported_scope_message() {
    let w = World::new();
    let err = ask(&Question::new(QuestionKind::Who, Scope::Data, row_subject(None)), &w.ctx()).unwrap_err();
    assert_eq!(err.to_string(), "who is only defined for workflow provenance");
}

#[test]
fn data_answers() {
    let w = World::new();
    let a = |kind, subject| ask(&Question::new(kind, Scope::Data, subject), &w.ctx()).unwrap().to_string();
    assert_eq!(a(QuestionKind::How, row_subject(None)), "polynomial: r1*s1 + r1*s3\n");
    assert_eq!(a(QuestionKind::Why, row_subject(None)), "witness basis: {{r1,s1},{r1,s3}}\n");
    assert_eq!(
        a(QuestionKind::Where, row_subject(Some("voltage_2"))),
        "source cells:\n  (S,s1,voltage_2)\n  (S,s3,voltage_2)\n"
    );
    assert_eq!(a(QuestionKind::What, row_subject(None)), "attribute types:\n  voltage_2: decimal(3,1) from {S}\n");
    assert!(a(QuestionKind::WhyNot, expectation_subject()).contains("rejects {r1,s2}"));
}

#[test]
fn coarse_data_answers_are_lifted() {
    let w = World::new();
    let how = ask(&Question::new(QuestionKind::How, Scope::Data, row_subject(None)).coarse(), &w.ctx()).unwrap();
    assert_eq!(how.to_string(), "polynomial: 2*fR*fS\n");
    let why = ask(&Question::new(QuestionKind::Why, Scope::Data, row_subject(None)).coarse(), &w.ctx()).unwrap();
    assert_eq!(why.to_string(), "witness basis: {{fR,fS}}\n");
    let no_ids = Context { ids: None, ..w.ctx() };
    let err = ask(&Question::new(QuestionKind::How, Scope::Data, row_subject(None)).coarse(), &no_ids).unwrap_err();
    assert!(matches!(err, QuestionError::MissingContext(_)));
}

#[test]
fn why_equals_witnesses_of_how() {
    let w = World::new();
    let q = parse_query("SELECT sample_id, voltage_2 FROM R NATURAL JOIN S").unwrap();
    let rows = unprov_core::query::evaluate(&q, &w.snap).unwrap().rows.len();
    assert!(rows > 1);
    for row in 0..rows {
        let subject = Subject::Row { query: q.clone(), row, attribute: None };
        let Answer::Polynomial(p) = ask(&Question::new(QuestionKind::How, Scope::Data, subject.clone()), &w.ctx()).unwrap()
        else {
            panic!()
        };
        let why = ask(&Question::new(QuestionKind::Why, Scope::Data, subject), &w.ctx()).unwrap();
        assert_eq!(why, Answer::WitnessBasis(p.to_witness_basis()));
    }
}

fn workflow(kind: QuestionKind, granularity: Granularity) -> Answer {
    let w = World::new();
    let mut q = Question::new(kind, Scope::Workflow, Subject::Entity("dataset-R".into()));
    q.granularity = granularity;
    ask(&q, &w.ctx()).unwrap()
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

#[test]
fn workflow_answers_on_the_use_case() {
    use Granularity::*;
    assert_eq!(workflow(QuestionKind::What, Coarse), Answer::Activities(strings(&["prepare", "measure", "analyse"])));
    assert_eq!(workflow(QuestionKind::How, Fine), Answer::Activities(strings(&["prepare", "measure", "analyse"])));
    assert_eq!(workflow(QuestionKind::How, Coarse), Answer::Activities(strings(&["experiment"])));
    assert_eq!(workflow(QuestionKind::Who, Fine), Answer::Agents(strings(&["lab-org", "researcher"])));
    assert_eq!(workflow(QuestionKind::Which, Fine), Answer::Devices(strings(&["microscope", "stimulation-device"])));
    assert_eq!(workflow(QuestionKind::Which, Coarse), Answer::Devices(strings(&["microscope", "stimulation-device"])));
    assert_eq!(
        workflow(QuestionKind::Why, Fine),
        Answer::Plans(vec![PlanLineage { plan: "sop-v2".into(), revisions: strings(&["sop-v1", "sop-v2"]) }])
    );
    assert_eq!(
        workflow(QuestionKind::Where, Fine),
        Answer::Locations(vec![
            Location { node: "experiment".into(), location: "wet-lab".into() },
            Location { node: "measure".into(), location: "microscopy-room".into() },
        ])
    );
    assert_eq!(
        workflow(QuestionKind::Where, Coarse),
        Answer::Locations(vec![Location { node: "experiment".into(), location: "wet-lab".into() }])
    );
    let Answer::Timestamps(ts) = workflow(QuestionKind::When, Fine) else { panic!() };
    assert_eq!(ts.iter().map(|t| t.activity.as_str()).collect::<Vec<_>>(), ["prepare", "measure", "analyse"]);
    assert!(ts.windows(2).all(|p| p[0].end <= p[1].start));
    let Answer::Notes(notes) = workflow(QuestionKind::WhyNot, Fine) else { panic!() };
    let texts: Vec<&str> = notes.iter().map(|n| n.text.as_str()).collect();
    assert_eq!(texts, ["stimulation device recalibrated mid-series", "exposure time shortened to limit bleaching"]);
}

#[test]
fn workflow_subject_errors() {
    let w = World::new();
    let unknown = Question::new(QuestionKind::How, Scope::Workflow, Subject::Entity("nope".into()));
    assert!(matches!(ask(&unknown, &w.ctx()), Err(QuestionError::Graph(_))));
    let row = Question::new(QuestionKind::How, Scope::Workflow, row_subject(None));
    assert!(matches!(ask(&row, &w.ctx()), Err(QuestionError::InvalidSubject(_))));
    let no_graph = Context { graph: None, ..w.ctx() };
    let q = Question::new(QuestionKind::How, Scope::Workflow, Subject::Entity("dataset-R".into()));
    assert!(matches!(ask(&q, &no_graph), Err(QuestionError::MissingContext(_))));
}

#[test]
fn combined_how_walks_rows_to_files_to_workflow() {
    let w = World::new();
    let q = Question::new(QuestionKind::How, Scope::Combined, row_subject(None));
    let Answer::Combined(trace) = ask(&q, &w.ctx()).unwrap() else { panic!() };
    let data = ask(&Question::new(QuestionKind::How, Scope::Data, row_subject(None)), &w.ctx()).unwrap();
    assert_eq!(trace.data.as_ref(), Some(&data));
    assert_eq!(trace.lifted.as_ref().unwrap().to_string(), "2*fR*fS");
    assert_eq!(trace.files, ["fR", "fS"]);
    let entities: Vec<&str> = trace.entities.iter().map(|e| e.entity.as_str()).collect();
    assert_eq!(entities, ["dataset-R", "dataset-S"]);
    for e in &trace.entities {
        let acts: Vec<&str> = e.chain.iter().filter_map(|l| l.activity.as_deref()).collect();
        assert_eq!(acts, ["prepare", "measure", "analyse"]);
        assert_eq!(e.chain.last().unwrap().entity, e.entity);
    }
}

#[test]
fn combined_workflow_only_kind_has_no_data_part() {
    let w = World::new();
    let q = Question::new(QuestionKind::Who, Scope::Combined, row_subject(None));
    let Answer::Combined(trace) = ask(&q, &w.ctx()).unwrap() else { panic!() };
    assert!(trace.data.is_none());
    assert_eq!(trace.entities[0].answer, Answer::Agents(strings(&["lab-org", "researcher"])));
}

#[test]
fn json_envelope() {
    let w = World::new();
    let q = Question::new(QuestionKind::How, Scope::Data, row_subject(None));
    let a = ask(&q, &w.ctx()).unwrap();
    let v: serde_json::Value = serde_json::from_str(&answer_json(&q, &a)).unwrap();
    assert_eq!(v, serde_json::json!({"kind": "how", "scope": "data", "answer": {"type": "polynomial", "value": "r1*s1 + r1*s3"}}));
    let q = Question::new(QuestionKind::WhyNot, Scope::Combined, expectation_subject());
    let a = ask(&q, &w.ctx()).unwrap();
    let v: serde_json::Value = serde_json::from_str(&answer_json(&q, &a)).unwrap();
    assert_eq!(v["kind"], "why_not");
    assert_eq!(v["answer"]["value"]["lifted"], serde_json::Value::Null);
    assert_eq!(v["answer"]["value"]["files"], serde_json::json!(["fR", "fS"]));
}

#[test]
fn negated_kinds_other_than_why_not_are_rejected() {
    assert_eq!("why-not".parse::<QuestionKind>(), Ok(QuestionKind::WhyNot));
    assert_eq!("WHY_NOT".parse::<QuestionKind>(), Ok(QuestionKind::WhyNot));
    let err = "who-not".parse::<QuestionKind>().unwrap_err();
    assert!(err.contains("not supported"), "{err}");
    assert!("whence".parse::<QuestionKind>().is_err());
}
