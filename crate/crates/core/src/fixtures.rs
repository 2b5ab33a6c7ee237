//! The microscopy use case: two measurement tables, an updated tuple, the
//! files they came from, and the lab workflow that produced them.
//!
//! Shared by tests, the acceptance suite and the CLI demo data.

use chrono::{TimeZone, Utc};

use crate::bridge::{content_hash, FileRegistration, IdDatabase};
use crate::data_model::{parse_row, ProvenanceId, Schema, VersionedDatabase};
use crate::workflow::{
    Activity, AgentKind, Edge, EdgeType, Entity, EntityCategory, Node, Note, NoteKind, ProvGraph, Timestamp,
};

pub const R_SCHEMA: &str = "sample_id:int,intensity_1:decimal(6,3),voltage_1:decimal(3,1)";
pub const S_SCHEMA: &str = "sample_id:int,intensity_2:decimal(6,3),voltage_2:decimal(3,1)";

pub const R_CSV: &str = "sample_id,intensity_1,voltage_1\n1,40.027,0.9\n2,41.038,1.4\n";
pub const S_CSV: &str = "sample_id,intensity_2,voltage_2\n1,40.375,1.0\n1,39.998,1.3\n1,42.001,1.0\n";

/// Replacement values for r2.
pub const R2_UPDATE: [&str; 3] = ["2", "41.033", "1.4"];

pub const COMPARISON_QUERY: &str = "SELECT voltage_2 FROM R NATURAL JOIN S WHERE intensity_1 < intensity_2";

fn load(db: &mut VersionedDatabase, relation: &str, schema: &str, csv: &str) {
    let schema = Schema::parse(relation, schema).expect("fixture schema");
    for line in csv.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        db.insert_tuple(relation, parse_row(&schema, &fields).expect("fixture row")).expect("fixture insert");
    }
}

/// R and S loaded at version 1, without the update.
pub fn initial_database() -> VersionedDatabase {
    let mut db = VersionedDatabase::new();
    db.define_relation(Schema::parse("R", R_SCHEMA).unwrap()).unwrap();
    db.define_relation(Schema::parse("S", S_SCHEMA).unwrap()).unwrap();
    load(&mut db, "R", R_SCHEMA, R_CSV);
    load(&mut db, "S", S_SCHEMA, S_CSV);
    db
}

/// R and S with r2 updated at version 2.
pub fn database() -> VersionedDatabase {
    let mut db = initial_database();
    let schema = db.schema("R").unwrap().clone();
    db.update_tuple("R", "r2", parse_row(&schema, &R2_UPDATE).unwrap()).unwrap();
    db
}

fn ids(list: &[&str]) -> std::collections::BTreeSet<ProvenanceId> {
    list.iter().map(|s| s.parse().unwrap()).collect()
}

/// fR covers every version of R's tuples, fS covers S.
pub fn id_database() -> IdDatabase {
    let mut idb = IdDatabase::new();
    idb.register_file(FileRegistration {
        file_id: Some("fR".into()),
        name: "R.csv".into(),
        path: "measurements/R.csv".into(),
        content_hash: content_hash(R_CSV.as_bytes()),
        relation: "R".into(),
        tuple_ids: ids(&["r1", "r2@t1", "r2@t2"]),
        workflow_entity: Some("dataset-R".into()),
    })
    .unwrap();
    idb.register_file(FileRegistration {
        file_id: Some("fS".into()),
        name: "S.csv".into(),
        path: "measurements/S.csv".into(),
        content_hash: content_hash(S_CSV.as_bytes()),
        relation: "S".into(),
        tuple_ids: ids(&["s1", "s2", "s3"]),
        workflow_entity: Some("dataset-S".into()),
    })
    .unwrap();
    idb
}

fn at(hour: u32, min: u32) -> Timestamp {
    Utc.with_ymd_and_hms(2024, 5, 6, hour, min, 0).unwrap()
}

/// Preparation, measurement and analysis nested in one experiment run
/// under a revised SOP.
pub fn graph() -> ProvGraph {
    let mut g = ProvGraph::new();
    let nodes = [
        Node::agent("researcher", AgentKind::Person),
        Node::agent("lab-org", AgentKind::Organization),
        Node::activity("experiment", Activity::new().during(at(8, 0), at(17, 0)).with_attribute("location", "wet-lab")),
        Node::activity("prepare", Activity::new().within("experiment").during(at(8, 0), at(9, 30))),
        Node::activity(
            "measure",
            Activity::new().within("experiment").during(at(10, 0), at(12, 0)).with_attribute("location", "microscopy-room"),
        ),
        Node::activity("analyse", Activity::new().within("experiment").during(at(13, 0), at(16, 0))),
        Node::entity("cell-sample", Entity::new(EntityCategory::Sample)),
        Node::entity("microscope", Entity::new(EntityCategory::Device).with_attribute("model", "confocal")),
        Node::entity("stimulation-device", Entity::new(EntityCategory::Device)),
        Node::entity("microscopy-images", Entity::new(EntityCategory::Data)),
        Node::entity("tabular-data", Entity::new(EntityCategory::Data)),
        Node::entity("dataset-R", Entity::new(EntityCategory::Data)),
        Node::entity("dataset-S", Entity::new(EntityCategory::Data)),
        Node::entity("sop-v1", Entity::new(EntityCategory::Plan)),
        Node::entity("sop-v2", Entity::new(EntityCategory::Plan)),
    ];
    for n in nodes {
        g.add_node(n).expect("fixture node");
    }
    let edges = [
        (EdgeType::ActedOnBehalfOf, "researcher", "lab-org"),
        (EdgeType::WasAssociatedWith, "prepare", "researcher"),
        (EdgeType::WasAssociatedWith, "measure", "researcher"),
        (EdgeType::WasAssociatedWith, "analyse", "researcher"),
        (EdgeType::WasGeneratedBy, "cell-sample", "prepare"),
        (EdgeType::Used, "measure", "cell-sample"),
        (EdgeType::Used, "measure", "microscope"),
        (EdgeType::Used, "measure", "stimulation-device"),
        (EdgeType::WasGeneratedBy, "microscopy-images", "measure"),
        (EdgeType::Used, "analyse", "microscopy-images"),
        (EdgeType::WasGeneratedBy, "tabular-data", "analyse"),
        (EdgeType::WasDerivedFrom, "tabular-data", "microscopy-images"),
        (EdgeType::WasDerivedFrom, "dataset-R", "tabular-data"),
        (EdgeType::WasDerivedFrom, "dataset-S", "tabular-data"),
        (EdgeType::WasInformedBy, "analyse", "measure"),
        (EdgeType::HadPlan, "experiment", "sop-v2"),
        (EdgeType::WasRevisionOf, "sop-v2", "sop-v1"),
    ];
    for (ty, from, to) in edges {
        g.add_edge(Edge::new(ty, from, to)).expect("fixture edge");
    }
    g.attach_note(Note::new("measure", NoteKind::Warning, "stimulation device recalibrated mid-series").by("researcher"))
        .unwrap();
    g.attach_note(Note::new("sop-v2", NoteKind::DesignComment, "exposure time shortened to limit bleaching")).unwrap();
    g
}
