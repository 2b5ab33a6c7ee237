//! Random small databases and queries, plus a naive derivation-enumerating
//! evaluator used as an oracle for the annotated engine.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use unprov_core::annotations::Polynomial;
use unprov_core::data_model::{ProvenanceId, Schema, Snapshot, Value, VersionedDatabase};
use unprov_core::query::{output_columns, AlgebraExpr, CmpOp, Operand, Predicate};

const POOL: [&str; 3] = ["x", "y", "z"];
const NAMES: [&str; 3] = ["A", "B", "C"];
const OPS: [CmpOp; 6] = [CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ne, CmpOp::Ge, CmpOp::Gt];

pub struct Instance {
    pub db: VersionedDatabase,
    /// Attribute names per relation.
    pub schemas: BTreeMap<String, Vec<String>>,
}

impl Instance {
    pub fn snapshot(&self) -> Snapshot {
        self.db.live()
    }
}

/// Up to three integer relations over attributes drawn from x, y, z, each
/// holding up to six tuples with values in 0..3.
pub fn random_instance<R: Rng>(rng: &mut R) -> Instance {
    let mut db = VersionedDatabase::new();
    let mut schemas = BTreeMap::new();
    let count = rng.gen_range(1..=3);
    for name in &NAMES[..count] {
        let mut attrs: Vec<&str> = POOL.iter().copied().filter(|_| rng.gen_bool(0.6)).collect();
        if attrs.is_empty() {
            attrs.push(POOL.choose(rng).unwrap());
        }
        let spec: Vec<String> = attrs.iter().map(|a| format!("{a}:int")).collect();
        db.define_relation(Schema::parse(*name, &spec.join(",")).unwrap()).unwrap();
        for _ in 0..rng.gen_range(0..=6) {
            let values = attrs.iter().map(|_| Value::Integer(rng.gen_range(0..3))).collect();
            db.insert_tuple(name, values).unwrap();
        }
        schemas.insert(name.to_string(), attrs.iter().map(|a| a.to_string()).collect());
    }
    Instance { db, schemas }
}

fn random_predicate<R: Rng>(rng: &mut R, cols: &[String], depth: usize) -> Predicate {
    if depth == 0 || rng.gen_bool(0.6) {
        let left = Operand::attr(cols.choose(rng).unwrap().clone());
        let right = if rng.gen_bool(0.5) {
            Operand::attr(cols.choose(rng).unwrap().clone())
        } else {
            Operand::number(rng.gen_range(0..3).to_string())
        };
        return Predicate::compare(left, *OPS.choose(rng).unwrap(), right);
    }
    let a = random_predicate(rng, cols, depth - 1);
    match rng.gen_range(0..3) {
        0 => a.and(random_predicate(rng, cols, depth - 1)),
        1 => a.or(random_predicate(rng, cols, depth - 1)),
        _ => a.not(),
    }
}

fn columns_of(inst: &Instance, expr: &AlgebraExpr) -> Option<Vec<String>> {
    output_columns(expr, &inst.snapshot()).ok().map(|cs| cs.into_iter().map(|c| c.name).collect())
}

fn random_subset<R: Rng>(rng: &mut R, cols: &[String]) -> Vec<String> {
    let mut picked: Vec<String> = cols.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
    if picked.is_empty() {
        picked.push(cols.choose(rng).unwrap().clone());
    }
    picked
}

fn random_expr_once<R: Rng>(rng: &mut R, inst: &Instance, depth: usize) -> Option<AlgebraExpr> {
    let names: Vec<&String> = inst.schemas.keys().collect();
    if depth == 0 || rng.gen_bool(0.25) {
        return Some(AlgebraExpr::scan(names.choose(rng).unwrap().as_str()));
    }
    let expr = match rng.gen_range(0..4) {
        0 => {
            let input = random_expr_once(rng, inst, depth - 1)?;
            let cols = columns_of(inst, &input)?;
            input.select(random_predicate(rng, &cols, 2))
        }
        1 => {
            let input = random_expr_once(rng, inst, depth - 1)?;
            let cols = columns_of(inst, &input)?;
            input.project(random_subset(rng, &cols))
        }
        2 => random_expr_once(rng, inst, depth - 1)?.join(random_expr_once(rng, inst, depth - 1)?),
        // Each side gains a projection, so the operands get two levels less.
        _ if depth < 2 => return Some(AlgebraExpr::scan(names.choose(rng).unwrap().as_str())),
        _ => {
            let left = random_expr_once(rng, inst, depth - 2)?;
            let right = random_expr_once(rng, inst, depth - 2)?;
            let lc = columns_of(inst, &left)?;
            let rc = columns_of(inst, &right)?;
            let shared: Vec<String> = lc.iter().filter(|c| rc.contains(c)).cloned().collect();
            if shared.is_empty() {
                return None;
            }
            let cols = random_subset(rng, &shared);
            left.project(cols.clone()).union(right.project(cols))
        }
    };
    columns_of(inst, &expr).map(|_| expr)
}

/// A well-typed expression of depth at most `max_depth`.
pub fn random_expr<R: Rng>(rng: &mut R, inst: &Instance, max_depth: usize) -> AlgebraExpr {
    loop {
        if let Some(e) = random_expr_once(rng, inst, max_depth) {
            assert!(e.depth() <= max_depth);
            return e;
        }
    }
}

/// One way of producing a row: its values and the source ids used.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub values: Vec<i64>,
    pub ids: Vec<ProvenanceId>,
}

fn int(v: &Value) -> i64 {
    match v {
        Value::Integer(i) => *i,
        other => panic!("oracle handles integers only, got {other:?}"),
    }
}

fn operand(cols: &[String], row: &[i64], op: &Operand) -> i64 {
    match op {
        Operand::Attribute(a) => row[cols.iter().position(|c| c == a).unwrap()],
        Operand::Literal(unprov_core::query::Literal::Number(n)) => n.parse().unwrap(),
        other => panic!("unsupported operand {other:?}"),
    }
}

fn holds(cols: &[String], row: &[i64], p: &Predicate) -> bool {
    match p {
        Predicate::Compare { left, op, right } => {
            let (l, r) = (operand(cols, row, left), operand(cols, row, right));
            match op {
                CmpOp::Lt => l < r,
                CmpOp::Le => l <= r,
                CmpOp::Eq => l == r,
                CmpOp::Ne => l != r,
                CmpOp::Ge => l >= r,
                CmpOp::Gt => l > r,
            }
        }
        Predicate::And(a, b) => holds(cols, row, a) && holds(cols, row, b),
        Predicate::Or(a, b) => holds(cols, row, a) || holds(cols, row, b),
        Predicate::Not(a) => !holds(cols, row, a),
    }
}

/// Every derivation of `expr`, with the output column names.
pub fn derivations(expr: &AlgebraExpr, snap: &Snapshot) -> (Vec<String>, Vec<Derivation>) {
    match expr {
        AlgebraExpr::Scan(name) => {
            let rel = snap.relation(name).unwrap();
            let cols = rel.schema.attributes.iter().map(|a| a.name.clone()).collect();
            let ds = rel
                .tuples
                .iter()
                .map(|t| Derivation { values: t.values.iter().map(int).collect(), ids: vec![t.id.clone()] })
                .collect();
            (cols, ds)
        }
        AlgebraExpr::Select { predicate, input } => {
            let (cols, ds) = derivations(input, snap);
            let kept = ds.into_iter().filter(|d| holds(&cols, &d.values, predicate)).collect();
            (cols, kept)
        }
        AlgebraExpr::Project { columns, input } => {
            let (cols, ds) = derivations(input, snap);
            let wanted: Vec<String> = match columns {
                unprov_core::query::Projection::All => cols.clone(),
                unprov_core::query::Projection::Columns(c) => c.clone(),
            };
            let idx: Vec<usize> = wanted.iter().map(|w| cols.iter().position(|c| c == w).unwrap()).collect();
            let ds = ds
                .into_iter()
                .map(|d| Derivation { values: idx.iter().map(|&i| d.values[i]).collect(), ids: d.ids })
                .collect();
            (wanted, ds)
        }
        AlgebraExpr::NaturalJoin { left, right } => {
            let (lc, ld) = derivations(left, snap);
            let (rc, rd) = derivations(right, snap);
            let mut cols = lc.clone();
            cols.extend(rc.iter().filter(|c| !lc.contains(c)).cloned());
            let mut out = Vec::new();
            for l in &ld {
                for r in &rd {
                    let agree = rc
                        .iter()
                        .enumerate()
                        .all(|(ri, c)| lc.iter().position(|x| x == c).is_none_or(|li| l.values[li] == r.values[ri]));
                    if !agree {
                        continue;
                    }
                    let mut values = l.values.clone();
                    values.extend(rc.iter().enumerate().filter(|(_, c)| !lc.contains(c)).map(|(ri, _)| r.values[ri]));
                    let mut ids = l.ids.clone();
                    ids.extend(r.ids.iter().cloned());
                    out.push(Derivation { values, ids });
                }
            }
            (cols, out)
        }
        AlgebraExpr::Union { left, right } => {
            let (cols, mut ld) = derivations(left, snap);
            let (_, rd) = derivations(right, snap);
            ld.extend(rd);
            (cols, ld)
        }
    }
}

/// Sorted variable multiset to coefficient.
pub type Terms = BTreeMap<Vec<ProvenanceId>, u64>;

/// Expected annotation of each output row: one term per derivation,
/// identical terms counted.
pub fn oracle_terms(expr: &AlgebraExpr, snap: &Snapshot) -> BTreeMap<Vec<i64>, Terms> {
    let (_, ds) = derivations(expr, snap);
    let mut out: BTreeMap<Vec<i64>, Terms> = BTreeMap::new();
    for mut d in ds {
        d.ids.sort();
        *out.entry(d.values).or_default().entry(d.ids).or_insert(0) += 1;
    }
    out
}

pub fn terms_of(p: &Polynomial) -> Terms {
    p.monomials().map(|m| (m.variables, m.coefficient)).collect()
}

pub fn row_key(values: &[Value]) -> Vec<i64> {
    values.iter().map(int).collect()
}
