//! K-relation evaluation with N[X] annotations, where- and what-provenance.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::ast::AlgebraExpr;
use super::typing::{output_columns, projection_indices, BoundPredicate, Column, JoinPlan};
use super::QueryError;
use crate::annotations::{Polynomial, WitnessBasis};
use crate::data_model::{Attribute, ProvenanceId, Schema, Snapshot, Value};

/// A source cell a result value was copied from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SourceCell {
    pub relation: String,
    pub id: ProvenanceId,
    pub attribute: String,
}

impl fmt::Display for SourceCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.relation, self.id, self.attribute)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultRow {
    pub values: Vec<Value>,
    pub polynomial: Polynomial,
    /// Per output attribute, the source cells copied into it.
    pub where_cells: Vec<BTreeSet<SourceCell>>,
}

/// Query output: value-distinct rows sorted by value, each annotated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedResult {
    pub schema: Schema,
    pub columns: Vec<Column>,
    pub rows: Vec<ResultRow>,
}

impl AnnotatedResult {
    pub fn row(&self, index: usize) -> Result<&ResultRow, QueryError> {
        self.rows.get(index).ok_or(QueryError::RowAbsent(index))
    }

    pub fn find_row(&self, values: &[Value]) -> Option<usize> {
        self.rows.iter().position(|r| r.values == values)
    }

    pub fn why_provenance(&self, row: usize) -> Result<WitnessBasis, QueryError> {
        Ok(self.row(row)?.polynomial.to_witness_basis())
    }

    pub fn where_provenance(&self, row: usize, attribute: &str) -> Result<&BTreeSet<SourceCell>, QueryError> {
        let r = self.row(row)?;
        let idx = self
            .schema
            .position(attribute)
            .ok_or_else(|| QueryError::UnknownAttribute(attribute.to_string()))?;
        Ok(&r.where_cells[idx])
    }

    pub fn what_provenance(&self) -> &[Column] {
        &self.columns
    }
}

#[derive(Debug, Clone)]
struct KRow {
    polynomial: Polynomial,
    cells: Vec<BTreeSet<SourceCell>>,
}

impl KRow {
    fn merge(&mut self, other: KRow) {
        self.polynomial = self.polynomial.add(&other.polynomial);
        for (mine, theirs) in self.cells.iter_mut().zip(other.cells) {
            mine.extend(theirs);
        }
    }
}

type KRelation = BTreeMap<Vec<Value>, KRow>;

fn insert_merge(rel: &mut KRelation, values: Vec<Value>, row: KRow) {
    match rel.get_mut(&values) {
        Some(existing) => existing.merge(row),
        None => {
            rel.insert(values, row);
        }
    }
}

fn eval_node(expr: &AlgebraExpr, state: &Snapshot) -> Result<(Vec<Column>, KRelation), QueryError> {
    match expr {
        AlgebraExpr::Scan(name) => {
            let cols = output_columns(expr, state)?;
            let rel = state.relation(name).expect("checked by output_columns");
            let mut out = KRelation::new();
            for tuple in &rel.tuples {
                let cells = rel
                    .schema
                    .attributes
                    .iter()
                    .map(|a| {
                        BTreeSet::from([SourceCell {
                            relation: name.clone(),
                            id: tuple.id.clone(),
                            attribute: a.name.clone(),
                        }])
                    })
                    .collect();
                let row = KRow { polynomial: Polynomial::variable(tuple.id.clone()), cells };
                insert_merge(&mut out, tuple.values.clone(), row);
            }
            Ok((cols, out))
        }
        AlgebraExpr::Select { predicate, input } => {
            let (cols, rows) = eval_node(input, state)?;
            let bound = BoundPredicate::bind(predicate, &cols)?;
            let kept = rows.into_iter().filter(|(values, _)| bound.eval(values)).collect();
            Ok((cols, kept))
        }
        AlgebraExpr::Project { columns, input } => {
            let (cols, rows) = eval_node(input, state)?;
            let idx = projection_indices(columns, &cols)?;
            let mut out = KRelation::new();
            for (values, row) in rows {
                let projected = idx.iter().map(|&i| values[i].clone()).collect();
                let cells = idx.iter().map(|&i| row.cells[i].clone()).collect();
                insert_merge(&mut out, projected, KRow { polynomial: row.polynomial, cells });
            }
            Ok((idx.into_iter().map(|i| cols[i].clone()).collect(), out))
        }
        AlgebraExpr::NaturalJoin { left, right } => {
            let (lcols, lrows) = eval_node(left, state)?;
            let (rcols, rrows) = eval_node(right, state)?;
            let plan = JoinPlan::new(&lcols, &rcols)?;
            let mut out = KRelation::new();
            for (lv, lrow) in &lrows {
                for (rv, rrow) in &rrows {
                    if !plan.matches(lv, rv) {
                        continue;
                    }
                    let mut cells = lrow.cells.clone();
                    for &(li, ri) in &plan.shared {
                        cells[li].extend(rrow.cells[ri].iter().cloned());
                    }
                    cells.extend(plan.right_rest.iter().map(|&ri| rrow.cells[ri].clone()));
                    let row = KRow { polynomial: lrow.polynomial.mul(&rrow.polynomial), cells };
                    insert_merge(&mut out, plan.combine(lv, rv), row);
                }
            }
            Ok((output_columns(expr, state)?, out))
        }
        AlgebraExpr::Union { left, right } => {
            let cols = output_columns(expr, state)?;
            let (_, mut out) = eval_node(left, state)?;
            let (_, rrows) = eval_node(right, state)?;
            for (values, row) in rrows {
                insert_merge(&mut out, values, row);
            }
            Ok((cols, out))
        }
    }
}

/// Evaluates `expr` over `state` under K-relation semantics.
pub fn evaluate(expr: &AlgebraExpr, state: &Snapshot) -> Result<AnnotatedResult, QueryError> {
    let (columns, rows) = eval_node(expr, state)?;
    let schema = Schema {
        relation_name: "result".into(),
        attributes: columns.iter().map(|c| Attribute::new(c.name.clone(), c.ty)).collect(),
    };
    let rows = rows
        .into_iter()
        .filter(|(_, row)| !row.polynomial.is_zero())
        .map(|(values, row)| ResultRow { values, polynomial: row.polynomial, where_cells: row.cells })
        .collect();
    Ok(AnnotatedResult { schema, columns, rows })
}
