//! Why-not explanations for missing answers.
//!
//! The query is re-run with every selection disabled, keeping each derivation
//! (one source tuple per scan) separate. A derivation that produces the
//! expected values was rejected by a selection; the first failing conjunct in
//! bottom-up, left-to-right order is reported. When no derivation produces the
//! expectation at all, source tuples carrying an expected value are traced to
//! the join that drops them, and values found nowhere are reported as absent.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::ast::{AlgebraExpr, Operand, Predicate};
use super::eval::evaluate;
use super::typing::{output_columns, position, projection_indices, BoundPredicate, Column, JoinPlan};
use super::QueryError;
use crate::data_model::{ProvenanceId, Snapshot, Value};

/// Expected output values, by attribute.
pub type Expectation = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OperandValue {
    pub operand: String,
    #[serde(serialize_with = "crate::render::as_display")]
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "finding", rename_all = "snake_case")]
pub enum WhyNotFinding {
    /// A selection rejected a derivation that would produce the expectation.
    PickySelection {
        predicate: String,
        witness: BTreeSet<ProvenanceId>,
        operands: Vec<OperandValue>,
    },
    /// A source tuple carrying an expected value found no join partner.
    MissingJoinPartner {
        relation: String,
        source: ProvenanceId,
        #[serde(serialize_with = "crate::render::pairs_as_display")]
        join_values: Vec<(String, Value)>,
    },
    /// No scanned source tuple holds the expected value.
    AbsentSourceValue {
        attribute: String,
        #[serde(serialize_with = "crate::render::as_display")]
        value: Value,
    },
    /// Every expected value exists in some derivation, but never together.
    UnmatchedCombination {
        #[serde(serialize_with = "crate::render::pairs_as_display")]
        expectation: Vec<(String, Value)>,
    },
}

impl fmt::Display for WhyNotFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WhyNotFinding::PickySelection { predicate, witness, operands } => {
                let ids: Vec<String> = witness.iter().map(ToString::to_string).collect();
                let ops: Vec<String> = operands.iter().map(|o| format!("{}={}", o.operand, o.value)).collect();
                write!(f, "picky selection [{predicate}] rejects {{{}}} with {}", ids.join(","), ops.join(", "))
            }
            WhyNotFinding::MissingJoinPartner { relation, source, join_values } => {
                let vals: Vec<String> = join_values.iter().map(|(a, v)| format!("{a} = {v}")).collect();
                write!(f, "missing join partner for {relation}:{source} on {}", vals.join(", "))
            }
            WhyNotFinding::AbsentSourceValue { attribute, value } => {
                write!(f, "no source tuple has {attribute} = {value}")
            }
            WhyNotFinding::UnmatchedCombination { expectation } => {
                let vals: Vec<String> = expectation.iter().map(|(a, v)| format!("{a} = {v}")).collect();
                write!(f, "no derivation combines {}", vals.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct WhyNotExplanation {
    pub findings: Vec<WhyNotFinding>,
}

impl WhyNotExplanation {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }
}

impl fmt::Display for WhyNotExplanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, finding) in self.findings.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{finding}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct SourceRef {
    relation: String,
    id: ProvenanceId,
}

#[derive(Debug, Clone)]
struct Failure {
    predicate: String,
    operands: Vec<OperandValue>,
}

#[derive(Debug, Clone)]
struct Derivation {
    values: Vec<Value>,
    sources: Vec<SourceRef>,
    failure: Option<Failure>,
}

impl Derivation {
    fn uses(&self, relation: &str, id: &ProvenanceId) -> bool {
        self.sources.iter().any(|s| s.relation == relation && &s.id == id)
    }
}

struct Conjunct {
    text: String,
    bound: BoundPredicate,
    /// Operand labels and the column (if any) each reads.
    operands: Vec<(String, Option<usize>, Option<Value>)>,
}

fn conjuncts(predicate: &Predicate, cols: &[Column]) -> Result<Vec<Conjunct>, QueryError> {
    predicate
        .conjuncts()
        .into_iter()
        .map(|c| {
            let bound = BoundPredicate::bind(c, cols)?;
            let operands = match (c, &bound) {
                (Predicate::Compare { left, right, .. }, BoundPredicate::Compare { left: bl, right: br, .. }) => {
                    vec![operand_label(left, bl), operand_label(right, br)]
                }
                _ => {
                    let mut names = Vec::new();
                    attributes_of(c, &mut names);
                    names
                        .into_iter()
                        .map(|n| {
                            let idx = position(cols, &n);
                            (n, idx, None)
                        })
                        .collect()
                }
            };
            Ok(Conjunct { text: c.to_string(), bound, operands })
        })
        .collect()
}

fn operand_label(op: &Operand, bound: &super::typing::BoundOperand) -> (String, Option<usize>, Option<Value>) {
    match bound {
        super::typing::BoundOperand::Column(i) => (op.to_string(), Some(*i), None),
        super::typing::BoundOperand::Const(v) => (op.to_string(), None, Some(v.clone())),
    }
}

fn attributes_of(p: &Predicate, out: &mut Vec<String>) {
    match p {
        Predicate::Compare { left, right, .. } => {
            for op in [left, right] {
                if let Operand::Attribute(a) = op {
                    if !out.contains(a) {
                        out.push(a.clone());
                    }
                }
            }
        }
        Predicate::And(a, b) | Predicate::Or(a, b) => {
            attributes_of(a, out);
            attributes_of(b, out);
        }
        Predicate::Not(a) => attributes_of(a, out),
    }
}

/// Derivations of `expr` with selections recording, instead of applying,
/// their first rejection.
fn derive(expr: &AlgebraExpr, state: &Snapshot) -> Result<(Vec<Column>, Vec<Derivation>), QueryError> {
    match expr {
        AlgebraExpr::Scan(name) => {
            let cols = output_columns(expr, state)?;
            let rel = state.relation(name).expect("checked by output_columns");
            let out = rel
                .tuples
                .iter()
                .map(|t| Derivation {
                    values: t.values.clone(),
                    sources: vec![SourceRef { relation: name.clone(), id: t.id.clone() }],
                    failure: None,
                })
                .collect();
            Ok((cols, out))
        }
        AlgebraExpr::Select { predicate, input } => {
            let (cols, mut rows) = derive(input, state)?;
            let parts = conjuncts(predicate, &cols)?;
            for d in rows.iter_mut().filter(|d| d.failure.is_none()) {
                if let Some(c) = parts.iter().find(|c| !c.bound.eval(&d.values)) {
                    let operands = c
                        .operands
                        .iter()
                        .map(|(label, idx, constant)| OperandValue {
                            operand: label.clone(),
                            value: match (idx, constant) {
                                (Some(i), _) => d.values[*i].clone(),
                                (None, Some(v)) => v.clone(),
                                (None, None) => unreachable!("operand is a column or a constant"),
                            },
                        })
                        .collect();
                    d.failure = Some(Failure { predicate: c.text.clone(), operands });
                }
            }
            Ok((cols, rows))
        }
        AlgebraExpr::Project { columns, input } => {
            let (cols, rows) = derive(input, state)?;
            let idx = projection_indices(columns, &cols)?;
            let rows = rows
                .into_iter()
                .map(|d| Derivation {
                    values: idx.iter().map(|&i| d.values[i].clone()).collect(),
                    ..d
                })
                .collect();
            Ok((idx.into_iter().map(|i| cols[i].clone()).collect(), rows))
        }
        AlgebraExpr::NaturalJoin { left, right } => {
            let (lcols, lrows) = derive(left, state)?;
            let (rcols, rrows) = derive(right, state)?;
            let plan = JoinPlan::new(&lcols, &rcols)?;
            let mut out = Vec::new();
            for l in &lrows {
                for r in rrows.iter().filter(|r| plan.matches(&l.values, &r.values)) {
                    let mut sources = l.sources.clone();
                    sources.extend(r.sources.iter().cloned());
                    out.push(Derivation {
                        values: plan.combine(&l.values, &r.values),
                        sources,
                        failure: l.failure.clone().or_else(|| r.failure.clone()),
                    });
                }
            }
            Ok((output_columns(expr, state)?, out))
        }
        AlgebraExpr::Union { left, right } => {
            let cols = output_columns(expr, state)?;
            let (_, mut out) = derive(left, state)?;
            out.extend(derive(right, state)?.1);
            Ok((cols, out))
        }
    }
}

fn matches(values: &[Value], expected: &[(usize, &Value)]) -> bool {
    expected
        .iter()
        .all(|(i, v)| matches!(values[*i].compare(v), Ok(std::cmp::Ordering::Equal)))
}

/// Explains why no output row of `expr` matches `expectation`.
pub fn why_not(expr: &AlgebraExpr, state: &Snapshot, expectation: &Expectation) -> Result<WhyNotExplanation, QueryError> {
    if expectation.is_empty() {
        return Err(QueryError::InvalidExpectation("expectation is empty".into()));
    }
    let result = evaluate(expr, state)?;
    let mut expected = Vec::new();
    for (attr, value) in expectation {
        let i = result
            .schema
            .position(attr)
            .ok_or_else(|| QueryError::UnknownAttribute(attr.clone()))?;
        if !value.comparable_with_type(&result.schema.attributes[i].ty) {
            return Err(QueryError::TypeMismatch(format!(
                "expected value {value} does not fit {attr}:{}",
                result.schema.attributes[i].ty
            )));
        }
        expected.push((i, value));
    }
    if result.rows.iter().any(|r| matches(&r.values, &expected)) {
        return Err(QueryError::NotMissing);
    }

    let (_, derivations) = derive(expr, state)?;
    let mut findings = Vec::new();
    for d in derivations.iter().filter(|d| matches(&d.values, &expected)) {
        let failure = d
            .failure
            .as_ref()
            .expect("an unrejected matching derivation would appear in the result");
        findings.push(WhyNotFinding::PickySelection {
            predicate: failure.predicate.clone(),
            witness: d.sources.iter().map(|s| s.id.clone()).collect(),
            operands: failure.operands.clone(),
        });
    }
    if !findings.is_empty() {
        return Ok(WhyNotExplanation { findings });
    }

    for (attr, value) in expectation {
        let carriers = carriers(expr, state, attr, value);
        if carriers.is_empty() {
            findings.push(WhyNotFinding::AbsentSourceValue { attribute: attr.clone(), value: value.clone() });
            continue;
        }
        for carrier in &carriers {
            for f in locate_lost(expr, state, carrier)? {
                if !findings.contains(&f) {
                    findings.push(f);
                }
            }
        }
    }
    if findings.is_empty() {
        findings.push(WhyNotFinding::UnmatchedCombination {
            expectation: expectation.iter().map(|(a, v)| (a.clone(), v.clone())).collect(),
        });
    }
    Ok(WhyNotExplanation { findings })
}

/// Scanned source tuples whose `attribute` equals `value`.
fn carriers(expr: &AlgebraExpr, state: &Snapshot, attribute: &str, value: &Value) -> Vec<SourceRef> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for relation in expr.scans() {
        if !seen.insert(relation) {
            continue;
        }
        let Some(rel) = state.relation(relation) else { continue };
        let Some(i) = rel.schema.position(attribute) else { continue };
        for t in &rel.tuples {
            if matches!(t.values[i].compare(value), Ok(std::cmp::Ordering::Equal)) {
                out.push(SourceRef { relation: relation.to_string(), id: t.id.clone() });
            }
        }
    }
    out
}

/// The lowest joins at which derivations of `carrier` die for lack of a partner.
fn locate_lost(expr: &AlgebraExpr, state: &Snapshot, carrier: &SourceRef) -> Result<Vec<WhyNotFinding>, QueryError> {
    match expr {
        AlgebraExpr::Scan(_) => Ok(Vec::new()),
        AlgebraExpr::Select { input, .. } | AlgebraExpr::Project { input, .. } => locate_lost(input, state, carrier),
        AlgebraExpr::Union { left, right } => {
            let mut out = locate_lost(left, state, carrier)?;
            out.extend(locate_lost(right, state, carrier)?);
            Ok(out)
        }
        AlgebraExpr::NaturalJoin { left, right } => {
            let mut out = locate_lost(left, state, carrier)?;
            out.extend(locate_lost(right, state, carrier)?);
            if !out.is_empty() {
                return Ok(out);
            }
            let (lcols, lrows) = derive(left, state)?;
            let (rcols, rrows) = derive(right, state)?;
            let plan = JoinPlan::new(&lcols, &rcols)?;
            let (_, joined) = derive(expr, state)?;
            if joined.iter().any(|d| d.uses(&carrier.relation, &carrier.id)) {
                return Ok(out);
            }
            let sides = [(&lrows, &lcols, true), (&rrows, &rcols, false)];
            for (rows, cols, is_left) in sides {
                for d in rows.iter().filter(|d| d.uses(&carrier.relation, &carrier.id)) {
                    let join_values: Vec<(String, Value)> = plan
                        .shared
                        .iter()
                        .map(|&(li, ri)| {
                            let i = if is_left { li } else { ri };
                            (cols[i].name.clone(), d.values[i].clone())
                        })
                        .collect();
                    let finding = WhyNotFinding::MissingJoinPartner {
                        relation: carrier.relation.clone(),
                        source: carrier.id.clone(),
                        join_values,
                    };
                    if !out.contains(&finding) {
                        out.push(finding);
                    }
                }
            }
            Ok(out)
        }
    }
}
