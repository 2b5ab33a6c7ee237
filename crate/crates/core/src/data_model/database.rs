use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{AttributeType, DataError, ProvenanceId, Schema, Value};

/// A source tuple together with its provenance ID.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedTuple {
    pub id: ProvenanceId,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct StoredTuple {
    base: String,
    version: u64,
    values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct StoredRelation {
    schema: Schema,
    id_prefix: String,
    id_counter: u64,
    /// Append-only history, in write order.
    tuples: Vec<StoredTuple>,
}

impl StoredRelation {
    fn version_count(&self, base: &str) -> usize {
        self.tuples.iter().filter(|t| t.base == base).count()
    }
}

/// Relational storage with append-only tuple history.
///
/// Version 0 is the empty initial state. The first insert opens version 1;
/// inserts join the current version and every update opens a new one.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VersionedDatabase {
    current_version: u64,
    /// Render every ID with its version, not only the IDs of updated tuples.
    #[serde(default)]
    versioned_ids: bool,
    relations: BTreeMap<String, StoredRelation>,
}

impl VersionedDatabase {
    pub fn new() -> Self {
        Self::default()
    }

    /// A database that suffixes every provenance ID with its version.
    pub fn with_versioned_ids() -> Self {
        VersionedDatabase { versioned_ids: true, ..Self::default() }
    }

    pub fn current_version(&self) -> u64 {
        self.current_version
    }

    pub fn relation_names(&self) -> impl Iterator<Item = &str> {
        self.relations.keys().map(String::as_str)
    }

    pub fn schema(&self, relation: &str) -> Option<&Schema> {
        self.relations.get(relation).map(|r| &r.schema)
    }

    pub fn define_relation(&mut self, schema: Schema) -> Result<(), DataError> {
        schema.validate()?;
        if self.relations.contains_key(&schema.relation_name) {
            return Err(DataError::DuplicateRelation(schema.relation_name.clone()));
        }
        let letter: String = schema
            .relation_name
            .chars()
            .next()
            .map(|c| c.to_ascii_lowercase())
            .into_iter()
            .collect();
        let letter_taken = self.relations.values().any(|r| r.id_prefix == letter);
        let id_prefix = if letter_taken || !letter.chars().all(|c| c.is_ascii_alphabetic()) {
            format!("rel_{}_", schema.relation_name)
        } else {
            letter
        };
        self.relations.insert(
            schema.relation_name.clone(),
            StoredRelation { schema, id_prefix, id_counter: 0, tuples: Vec::new() },
        );
        Ok(())
    }

    pub fn insert_tuple(&mut self, relation: &str, values: Vec<Value>) -> Result<ProvenanceId, DataError> {
        let rel = self
            .relations
            .get_mut(relation)
            .ok_or_else(|| DataError::UnknownRelation(relation.to_string()))?;
        check_conformance(&rel.schema, &values)?;
        if self.current_version == 0 {
            self.current_version = 1;
        }
        rel.id_counter += 1;
        let base = format!("{}{}", rel.id_prefix, rel.id_counter);
        rel.tuples.push(StoredTuple { base: base.clone(), version: self.current_version, values });
        self.render_id(relation, &base, self.current_version)
    }

    /// Stores a new version of the tuple `base`. The previous version stays in
    /// history and remains visible to earlier snapshots.
    pub fn update_tuple(&mut self, relation: &str, base: &str, values: Vec<Value>) -> Result<ProvenanceId, DataError> {
        let rel = self
            .relations
            .get_mut(relation)
            .ok_or_else(|| DataError::UnknownRelation(relation.to_string()))?;
        if !rel.tuples.iter().any(|t| t.base == base) {
            return Err(DataError::UnknownTuple { relation: relation.to_string(), base: base.to_string() });
        }
        check_conformance(&rel.schema, &values)?;
        self.current_version += 1;
        rel.tuples.push(StoredTuple { base: base.to_string(), version: self.current_version, values });
        self.render_id(relation, base, self.current_version)
    }

    /// Every stored version of `base`, oldest first, as currently rendered.
    pub fn versions_of(&self, relation: &str, base: &str) -> Result<Vec<ProvenanceId>, DataError> {
        let rel = self
            .relations
            .get(relation)
            .ok_or_else(|| DataError::UnknownRelation(relation.to_string()))?;
        rel.tuples
            .iter()
            .filter(|t| t.base == base)
            .map(|t| self.render_id(relation, &t.base, t.version))
            .collect()
    }

    /// Whether `id` names a stored tuple of `relation` under the current rendering.
    pub fn contains_id(&self, relation: &str, id: &ProvenanceId) -> bool {
        self.versions_of(relation, id.base())
            .map(|ids| ids.contains(id))
            .unwrap_or(false)
    }

    fn render_id(&self, relation: &str, base: &str, version: u64) -> Result<ProvenanceId, DataError> {
        let rel = &self.relations[relation];
        if self.versioned_ids || rel.version_count(base) > 1 {
            ProvenanceId::versioned(base, version)
        } else {
            ProvenanceId::new(base)
        }
    }

    /// The state as of version `t`: for each tuple, its latest version `<= t`.
    pub fn snapshot_at(&self, t: u64) -> Result<Snapshot, DataError> {
        if t > self.current_version {
            return Err(DataError::VersionOutOfRange { requested: t, current: self.current_version });
        }
        let mut relations = BTreeMap::new();
        for (name, rel) in &self.relations {
            let mut order: Vec<&str> = Vec::new();
            let mut latest: HashMap<&str, &StoredTuple> = HashMap::new();
            for tuple in rel.tuples.iter().filter(|tu| tu.version <= t) {
                if latest.insert(&tuple.base, tuple).is_none() {
                    order.push(&tuple.base);
                }
            }
            let tuples = order
                .into_iter()
                .map(|base| {
                    let stored = latest[base];
                    Ok(AnnotatedTuple {
                        id: self.render_id(name, base, stored.version)?,
                        values: stored.values.clone(),
                    })
                })
                .collect::<Result<Vec<_>, DataError>>()?;
            relations.insert(name.clone(), RelationInstance { schema: rel.schema.clone(), tuples });
        }
        Ok(Snapshot { version: t, relations })
    }

    pub fn live(&self) -> Snapshot {
        self.snapshot_at(self.current_version)
            .expect("current version is always in range")
    }

    /// Checks the structural invariants; used after deserializing.
    pub fn validate(&self) -> Result<(), DataError> {
        let mut seen_prefixes = HashSet::new();
        for (name, rel) in &self.relations {
            rel.schema.validate()?;
            if &rel.schema.relation_name != name {
                return Err(DataError::Corrupt(format!("relation key {name} does not match its schema")));
            }
            if !seen_prefixes.insert(rel.id_prefix.as_str()) {
                return Err(DataError::Corrupt(format!("id prefix {} used twice", rel.id_prefix)));
            }
            let mut keys = HashSet::new();
            for tuple in &rel.tuples {
                check_conformance(&rel.schema, &tuple.values)?;
                if tuple.version == 0 || tuple.version > self.current_version {
                    return Err(DataError::Corrupt(format!(
                        "tuple {} has version {} outside 1..={}",
                        tuple.base, tuple.version, self.current_version
                    )));
                }
                if !keys.insert((tuple.base.as_str(), tuple.version)) {
                    return Err(DataError::Corrupt(format!(
                        "duplicate tuple {}@t{} in {name}",
                        tuple.base, tuple.version
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_conformance(schema: &Schema, values: &[Value]) -> Result<(), DataError> {
    if values.len() != schema.arity() {
        return Err(DataError::ArityMismatch {
            relation: schema.relation_name.clone(),
            expected: schema.arity(),
            found: values.len(),
        });
    }
    for (value, attr) in values.iter().zip(&schema.attributes) {
        if !value.conforms_to(&attr.ty) {
            return Err(DataError::TypeMismatch {
                attribute: attr.name.clone(),
                expected: attr.ty,
                found: value.to_string(),
            });
        }
    }
    Ok(())
}

/// Parses one textual row against a schema.
pub fn parse_row(schema: &Schema, fields: &[&str]) -> Result<Vec<Value>, DataError> {
    if fields.len() != schema.arity() {
        return Err(DataError::ArityMismatch {
            relation: schema.relation_name.clone(),
            expected: schema.arity(),
            found: fields.len(),
        });
    }
    fields
        .iter()
        .zip(&schema.attributes)
        .map(|(f, a)| Value::parse(f, &a.ty))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationInstance {
    pub schema: Schema,
    pub tuples: Vec<AnnotatedTuple>,
}

/// A read-only database state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    version: u64,
    relations: BTreeMap<String, RelationInstance>,
}

impl Snapshot {
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn relation(&self, name: &str) -> Option<&RelationInstance> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, &RelationInstance)> {
        self.relations.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn attribute_type(&self, relation: &str, attribute: &str) -> Option<AttributeType> {
        self.relation(relation)?.schema.attribute(attribute).map(|a| a.ty)
    }

    /// Sub-database keeping only the tuples for which `keep` holds.
    pub fn retain(&self, mut keep: impl FnMut(&str, &ProvenanceId) -> bool) -> Snapshot {
        let relations = self
            .relations
            .iter()
            .map(|(name, rel)| {
                let tuples = rel.tuples.iter().filter(|t| keep(name, &t.id)).cloned().collect();
                (name.clone(), RelationInstance { schema: rel.schema.clone(), tuples })
            })
            .collect();
        Snapshot { version: self.version, relations }
    }

    pub fn tuple_count(&self) -> usize {
        self.relations.values().map(|r| r.tuples.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_db() -> VersionedDatabase {
        let mut db = VersionedDatabase::new();
        db.define_relation(
            Schema::parse("R", "sample_id:int,intensity_1:decimal(6,3),voltage_1:decimal(3,1)").unwrap(),
        )
        .unwrap();
        db
    }

    fn row(db: &VersionedDatabase, rel: &str, fields: &[&str]) -> Vec<Value> {
        parse_row(db.schema(rel).unwrap(), fields).unwrap()
    }

    #[test]
    fn define_rejects_duplicates() {
        let mut db = example_db();
        let err = db
            .define_relation(Schema::parse("R", "a:int").unwrap())
            .unwrap_err();
        assert!(err.to_string().contains("duplicate relation"));
        assert!(db.snapshot_at(0).unwrap().relation("R").unwrap().tuples.is_empty());
    }

    #[test]
    fn inserts_number_ids_per_relation() {
        let mut db = example_db();
        let r = row(&db, "R", &["1", "40.027", "0.9"]);
        assert_eq!(db.insert_tuple("R", r).unwrap().to_string(), "r1");
        let r = row(&db, "R", &["2", "41.038", "1.4"]);
        assert_eq!(db.insert_tuple("R", r).unwrap().to_string(), "r2");
        assert!(matches!(
            db.insert_tuple("Q", vec![Value::Integer(1)]),
            Err(DataError::UnknownRelation(_))
        ));
        assert_eq!(db.current_version(), 1);
    }

    #[test]
    fn insert_checks_types() {
        let mut db = example_db();
        let err = db
            .insert_tuple("R", vec![Value::Integer(1), Value::Integer(2), Value::Integer(3)])
            .unwrap_err();
        assert!(matches!(err, DataError::TypeMismatch { .. }));
        assert!(db.insert_tuple("R", vec![Value::Integer(1)]).is_err());
    }

    #[test]
    fn prefix_collision_uses_relation_name() {
        let mut db = example_db();
        db.define_relation(Schema::parse("Readings", "a:int").unwrap()).unwrap();
        let id = db.insert_tuple("Readings", vec![Value::Integer(1)]).unwrap();
        assert_eq!(id.to_string(), "rel_Readings_1");
    }

    #[test]
    fn update_versions_and_snapshots() {
        let mut db = example_db();
        let r1 = row(&db, "R", &["1", "40.027", "0.9"]);
        db.insert_tuple("R", r1).unwrap();
        let r2 = row(&db, "R", &["2", "41.038", "1.4"]);
        db.insert_tuple("R", r2).unwrap();
        let r2new = row(&db, "R", &["2", "41.033", "1.4"]);
        let id = db.update_tuple("R", "r2", r2new).unwrap();
        assert_eq!(id.to_string(), "r2@t2");
        assert_eq!(db.current_version(), 2);

        let at1 = db.snapshot_at(1).unwrap();
        let ids: Vec<String> = at1.relation("R").unwrap().tuples.iter().map(|t| t.id.to_string()).collect();
        assert_eq!(ids, ["r1", "r2@t1"]);
        assert_eq!(at1.relation("R").unwrap().tuples[1].values[1].to_string(), "41.038");

        let at2 = db.snapshot_at(2).unwrap();
        let ids: Vec<String> = at2.relation("R").unwrap().tuples.iter().map(|t| t.id.to_string()).collect();
        assert_eq!(ids, ["r1", "r2@t2"]);
        assert_eq!(at2.relation("R").unwrap().tuples[1].values[1].to_string(), "41.033");
        assert_eq!(at2, db.live());
        assert!(db.snapshot_at(3).is_err());
    }

    #[test]
    fn identical_update_still_versions() {
        let mut db = example_db();
        let r = row(&db, "R", &["1", "40.027", "0.9"]);
        db.insert_tuple("R", r.clone()).unwrap();
        assert_eq!(db.update_tuple("R", "r1", r).unwrap().to_string(), "r1@t2");
        assert_eq!(db.versions_of("R", "r1").unwrap().len(), 2);
    }

    #[test]
    fn update_unknown_base_fails() {
        let mut db = example_db();
        let r = row(&db, "R", &["1", "40.027", "0.9"]);
        assert!(matches!(db.update_tuple("R", "r9", r), Err(DataError::UnknownTuple { .. })));
    }

    #[test]
    fn fresh_db_snapshot_zero_is_empty() {
        let db = example_db();
        assert_eq!(db.snapshot_at(0).unwrap().tuple_count(), 0);
    }

    #[test]
    fn versioned_mode_renders_all_versions() {
        let mut db = VersionedDatabase::with_versioned_ids();
        db.define_relation(Schema::parse("S", "a:int").unwrap()).unwrap();
        assert_eq!(db.insert_tuple("S", vec![Value::Integer(1)]).unwrap().to_string(), "s1@t1");
    }

    #[test]
    fn serde_round_trip_validates() {
        let mut db = example_db();
        let r = row(&db, "R", &["1", "40.027", "0.9"]);
        db.insert_tuple("R", r).unwrap();
        let json = serde_json::to_string(&db).unwrap();
        let back: VersionedDatabase = serde_json::from_str(&json).unwrap();
        back.validate().unwrap();
        assert_eq!(back, db);
    }
}
