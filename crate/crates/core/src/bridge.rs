//! The ID database: which file each tuple came from.
//!
//! Lifting a tuple-level polynomial through this mapping yields file-level
//! (coarse) provenance that can be evaluated exactly like the fine one.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::annotations::{Polynomial, WitnessBasis};
use crate::data_model::{is_identifier, ProvenanceId, VersionedDatabase};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BridgeError {
    #[error("{id} is already registered to file {file_id}")]
    Conflict { id: ProvenanceId, file_id: String },
    #[error("file {0} covers no tuples")]
    EmptyTupleIds(String),
    #[error("duplicate file id {0}")]
    DuplicateFileId(String),
    #[error("invalid file id {0:?}")]
    InvalidFileId(String),
    #[error("invalid content hash {0:?} (expected 64 lowercase hex digits)")]
    InvalidHash(String),
    #[error("{0} is not registered to any file")]
    Unregistered(ProvenanceId),
    #[error("malformed id database: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileRecord {
    pub file_id: String,
    pub name: String,
    pub path: String,
    pub content_hash: String,
    pub relation: String,
    pub tuple_ids: BTreeSet<ProvenanceId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workflow_entity: Option<String>,
}

/// Input to [`IdDatabase::register_file`]. Without `file_id` the next free
/// `f<n>` is assigned.
#[derive(Debug, Clone, Default)]
pub struct FileRegistration {
    pub file_id: Option<String>,
    pub name: String,
    pub path: String,
    pub content_hash: String,
    pub relation: String,
    pub tuple_ids: BTreeSet<ProvenanceId>,
    pub workflow_entity: Option<String>,
}

/// SHA-256 of `bytes`, lowercase hex.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn valid_hash(h: &str) -> bool {
    h.len() == 64 && h.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdDatabase {
    records: BTreeMap<String, FileRecord>,
    index: BTreeMap<ProvenanceId, String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    records: Vec<FileRecord>,
}

impl IdDatabase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = &FileRecord> {
        self.records.values()
    }

    pub fn record(&self, file_id: &str) -> Option<&FileRecord> {
        self.records.get(file_id)
    }

    fn fresh_id(&self) -> String {
        (1..)
            .map(|n| format!("f{n}"))
            .find(|id| !self.records.contains_key(id))
            .expect("unbounded range")
    }

    pub fn register_file(&mut self, reg: FileRegistration) -> Result<&FileRecord, BridgeError> {
        let file_id = match reg.file_id {
            Some(id) if !is_identifier(&id) => return Err(BridgeError::InvalidFileId(id)),
            Some(id) if self.records.contains_key(&id) => return Err(BridgeError::DuplicateFileId(id)),
            Some(id) => id,
            None => self.fresh_id(),
        };
        if reg.tuple_ids.is_empty() {
            return Err(BridgeError::EmptyTupleIds(file_id));
        }
        if !valid_hash(&reg.content_hash) {
            return Err(BridgeError::InvalidHash(reg.content_hash));
        }
        if let Some((id, owner)) = reg.tuple_ids.iter().find_map(|id| self.index.get(id).map(|o| (id, o))) {
            return Err(BridgeError::Conflict { id: id.clone(), file_id: owner.clone() });
        }
        for id in &reg.tuple_ids {
            self.index.insert(id.clone(), file_id.clone());
        }
        let record = FileRecord {
            file_id: file_id.clone(),
            name: reg.name,
            path: reg.path,
            content_hash: reg.content_hash,
            relation: reg.relation,
            tuple_ids: reg.tuple_ids,
            workflow_entity: reg.workflow_entity,
        };
        Ok(self.records.entry(file_id).or_insert(record))
    }

    pub fn resolve(&self, id: &ProvenanceId) -> Result<&FileRecord, BridgeError> {
        self.index
            .get(id)
            .and_then(|f| self.records.get(f))
            .ok_or_else(|| BridgeError::Unregistered(id.clone()))
    }

    fn file_var(&self, id: &ProvenanceId) -> Result<ProvenanceId, BridgeError> {
        let record = self.resolve(id)?;
        Ok(ProvenanceId::new(record.file_id.as_str()).expect("file ids are identifiers"))
    }

    /// Renames every tuple variable to its file id.
    pub fn lift(&self, p: &Polynomial) -> Result<Polynomial, BridgeError> {
        p.try_rename(|v| self.file_var(v))
    }

    /// File-level image of a witness basis.
    pub fn lift_basis(&self, basis: &WitnessBasis) -> Result<WitnessBasis, BridgeError> {
        let lifted = basis
            .iter()
            .map(|w| w.iter().map(|id| self.file_var(id)).collect::<Result<BTreeSet<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(WitnessBasis::from_witnesses(lifted).expect("non-empty witnesses stay non-empty"))
    }

    /// Re-keys ids registered before their tuple was updated: an unversioned
    /// `r2` becomes `r2@t<first>` once `r2` has several versions.
    pub fn sync_versions(&mut self, db: &VersionedDatabase) {
        let mut renames = Vec::new();
        for record in self.records.values() {
            for id in record.tuple_ids.iter().filter(|id| id.version().is_none()) {
                if let Ok(versions) = db.versions_of(&record.relation, id.base()) {
                    if let Some(first) = versions.first().filter(|v| *v != id) {
                        renames.push((record.file_id.clone(), id.clone(), first.clone()));
                    }
                }
            }
        }
        for (file_id, old, new) in renames {
            let record = self.records.get_mut(&file_id).expect("collected from records");
            record.tuple_ids.remove(&old);
            record.tuple_ids.insert(new.clone());
            self.index.remove(&old);
            self.index.insert(new, file_id);
        }
    }

    /// `{"records":[...]}` ordered by file id.
    pub fn to_json(&self) -> String {
        let doc = Document { records: self.records.values().cloned().collect() };
        let mut out = serde_json::to_string_pretty(&doc).expect("id databases always serialize");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<IdDatabase, BridgeError> {
        let doc: Document = serde_json::from_str(text).map_err(|e| BridgeError::Malformed(e.to_string()))?;
        let mut idb = IdDatabase::new();
        for r in doc.records {
            idb.register_file(FileRegistration {
                file_id: Some(r.file_id),
                name: r.name,
                path: r.path,
                content_hash: r.content_hash,
                relation: r.relation,
                tuple_ids: r.tuple_ids,
                workflow_entity: r.workflow_entity,
            })?;
        }
        Ok(idb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(list: &[&str]) -> BTreeSet<ProvenanceId> {
        list.iter().map(|s| s.parse().unwrap()).collect()
    }

    fn reg(file_id: Option<&str>, relation: &str, tuple_ids: &[&str]) -> FileRegistration {
        FileRegistration {
            file_id: file_id.map(str::to_string),
            name: format!("{relation}.csv"),
            path: format!("/data/{relation}.csv"),
            content_hash: content_hash(relation.as_bytes()),
            relation: relation.into(),
            tuple_ids: ids(tuple_ids),
            workflow_entity: None,
        }
    }

    fn fixture() -> IdDatabase {
        let mut idb = IdDatabase::new();
        idb.register_file(reg(Some("fR"), "R", &["r1", "r2@t1", "r2@t2"])).unwrap();
        idb.register_file(reg(Some("fS"), "S", &["s1", "s2", "s3"])).unwrap();
        idb
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(content_hash(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn fresh_ids_count_up() {
        let mut idb = IdDatabase::new();
        assert_eq!(idb.register_file(reg(None, "R", &["r1"])).unwrap().file_id, "f1");
        assert_eq!(idb.register_file(reg(None, "S", &["s1"])).unwrap().file_id, "f2");
    }

    #[test]
    fn registration_errors() {
        let mut idb = fixture();
        assert_eq!(
            idb.register_file(reg(None, "R", &["r1"])).unwrap_err(),
            BridgeError::Conflict { id: "r1".parse().unwrap(), file_id: "fR".into() }
        );
        assert!(matches!(idb.register_file(reg(None, "R", &[])), Err(BridgeError::EmptyTupleIds(_))));
        let mut bad = reg(None, "T", &["t1"]);
        bad.content_hash = "ABC".into();
        assert!(matches!(idb.register_file(bad), Err(BridgeError::InvalidHash(_))));
        assert!(matches!(idb.register_file(reg(Some("fR"), "T", &["t1"])), Err(BridgeError::DuplicateFileId(_))));
        // Failed registrations leave no trace.
        assert_eq!(idb, fixture());
    }

    #[test]
    fn resolve_and_lift() {
        let idb = fixture();
        assert_eq!(idb.resolve(&"r1".parse().unwrap()).unwrap().file_id, "fR");
        assert_eq!(idb.resolve(&"s1".parse().unwrap()).unwrap().file_id, "fS");
        assert!(idb.resolve(&"zz".parse().unwrap()).is_err());
        let p: Polynomial = "r1*s1 + r1*s3".parse().unwrap();
        assert_eq!(idb.lift(&p).unwrap().to_string(), "2*fR*fS");
        assert_eq!(idb.lift(&"r1".parse().unwrap()).unwrap().to_string(), "fR");
        assert_eq!(idb.lift(&"s1 + s2 + s3".parse().unwrap()).unwrap().to_string(), "3*fS");
        assert!(matches!(idb.lift(&"x9".parse().unwrap()), Err(BridgeError::Unregistered(_))));
    }

    #[test]
    fn lifted_basis() {
        let idb = fixture();
        let p: Polynomial = "r1*s1 + r1*s3 + s2".parse().unwrap();
        assert_eq!(idb.lift_basis(&p.to_witness_basis()).unwrap().to_string(), "{{fR,fS},{fS}}");
    }

    #[test]
    fn json_round_trip_is_ordered() {
        let idb = fixture();
        let text = idb.to_json();
        assert!(text.find("\"fR\"").unwrap() < text.find("\"fS\"").unwrap());
        assert_eq!(IdDatabase::from_json(&text).unwrap(), idb);
        assert_eq!(IdDatabase::new().to_json(), "{\n  \"records\": []\n}\n");
    }

    #[test]
    fn sync_after_update() {
        use crate::data_model::{Schema, Value};
        let mut db = VersionedDatabase::new();
        db.define_relation(Schema::parse("R", "a:int").unwrap()).unwrap();
        db.insert_tuple("R", vec![Value::Integer(1)]).unwrap();
        db.insert_tuple("R", vec![Value::Integer(2)]).unwrap();
        let mut idb = IdDatabase::new();
        idb.register_file(reg(None, "R", &["r1", "r2"])).unwrap();
        let newer = db.update_tuple("R", "r2", vec![Value::Integer(3)]).unwrap();
        idb.sync_versions(&db);
        assert_eq!(idb.record("f1").unwrap().tuple_ids, ids(&["r1", "r2@t1"]));
        assert!(idb.resolve(&newer).is_err());
    }
}
