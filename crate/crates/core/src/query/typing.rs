//! Static checks: output columns of an expression and bound predicates.

use std::collections::BTreeSet;

use serde::Serialize;

use super::ast::{AlgebraExpr, Literal, Operand, Predicate, Projection};
use super::QueryError;
use crate::data_model::{AttributeType, Snapshot, Value};

/// An output attribute with its declared type and contributing relations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Column {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: AttributeType,
    pub sources: BTreeSet<String>,
}

pub(crate) fn position(columns: &[Column], name: &str) -> Option<usize> {
    columns.iter().position(|c| c.name == name)
}

/// Output columns of `expr` against `state`, validating every node.
pub fn output_columns(expr: &AlgebraExpr, state: &Snapshot) -> Result<Vec<Column>, QueryError> {
    match expr {
        AlgebraExpr::Scan(relation) => {
            let rel = state
                .relation(relation)
                .ok_or_else(|| QueryError::UnknownRelation(relation.clone()))?;
            Ok(rel
                .schema
                .attributes
                .iter()
                .map(|a| Column {
                    name: a.name.clone(),
                    ty: a.ty,
                    sources: BTreeSet::from([relation.clone()]),
                })
                .collect())
        }
        AlgebraExpr::Select { predicate, input } => {
            let cols = output_columns(input, state)?;
            BoundPredicate::bind(predicate, &cols)?;
            Ok(cols)
        }
        AlgebraExpr::Project { columns, input } => {
            let cols = output_columns(input, state)?;
            Ok(projection_indices(columns, &cols)?
                .into_iter()
                .map(|i| cols[i].clone())
                .collect())
        }
        AlgebraExpr::NaturalJoin { left, right } => {
            let l = output_columns(left, state)?;
            let r = output_columns(right, state)?;
            let plan = JoinPlan::new(&l, &r)?;
            Ok(plan.output_columns(&l, &r))
        }
        AlgebraExpr::Union { left, right } => {
            let l = output_columns(left, state)?;
            let r = output_columns(right, state)?;
            let same = l.len() == r.len() && l.iter().zip(&r).all(|(a, b)| a.name == b.name && a.ty == b.ty);
            if !same {
                return Err(QueryError::SchemaMismatch {
                    left: render_columns(&l),
                    right: render_columns(&r),
                });
            }
            Ok(l
                .into_iter()
                .zip(r)
                .map(|(mut a, b)| {
                    a.sources.extend(b.sources);
                    a
                })
                .collect())
        }
    }
}

fn render_columns(cols: &[Column]) -> String {
    cols.iter().map(|c| format!("{}:{}", c.name, c.ty)).collect::<Vec<_>>().join(", ")
}

pub(crate) fn projection_indices(projection: &Projection, cols: &[Column]) -> Result<Vec<usize>, QueryError> {
    match projection {
        Projection::All => Ok((0..cols.len()).collect()),
        Projection::Columns(names) => {
            if names.is_empty() {
                return Err(QueryError::EmptyProjection);
            }
            let mut out = Vec::with_capacity(names.len());
            for (i, name) in names.iter().enumerate() {
                if names[..i].contains(name) {
                    return Err(QueryError::DuplicateAttribute(name.clone()));
                }
                out.push(position(cols, name).ok_or_else(|| QueryError::UnknownAttribute(name.clone()))?);
            }
            Ok(out)
        }
    }
}

/// Shared-attribute positions of a natural join.
pub(crate) struct JoinPlan {
    /// (left index, right index) of each shared attribute.
    pub shared: Vec<(usize, usize)>,
    /// Right-side indices that are not shared, in order.
    pub right_rest: Vec<usize>,
}

impl JoinPlan {
    pub fn new(left: &[Column], right: &[Column]) -> Result<JoinPlan, QueryError> {
        let mut shared = Vec::new();
        let mut right_rest = Vec::new();
        for (ri, rc) in right.iter().enumerate() {
            match position(left, &rc.name) {
                Some(li) => {
                    if left[li].ty != rc.ty {
                        return Err(QueryError::TypeMismatch(format!(
                            "join attribute {} is {} on the left but {} on the right",
                            rc.name, left[li].ty, rc.ty
                        )));
                    }
                    shared.push((li, ri));
                }
                None => right_rest.push(ri),
            }
        }
        if shared.is_empty() {
            return Err(QueryError::NoSharedAttribute {
                left: render_columns(left),
                right: render_columns(right),
            });
        }
        Ok(JoinPlan { shared, right_rest })
    }

    fn output_columns(&self, left: &[Column], right: &[Column]) -> Vec<Column> {
        let mut out = left.to_vec();
        for (li, ri) in &self.shared {
            out[*li].sources.extend(right[*ri].sources.iter().cloned());
        }
        out.extend(self.right_rest.iter().map(|&ri| right[ri].clone()));
        out
    }

    pub fn matches(&self, left: &[Value], right: &[Value]) -> bool {
        self.shared.iter().all(|&(li, ri)| left[li] == right[ri])
    }

    pub fn combine(&self, left: &[Value], right: &[Value]) -> Vec<Value> {
        let mut out = left.to_vec();
        out.extend(self.right_rest.iter().map(|&ri| right[ri].clone()));
        out
    }
}

#[derive(Debug, Clone)]
pub(crate) enum BoundOperand {
    Column(usize),
    Const(Value),
}

impl BoundOperand {
    fn value<'a>(&'a self, row: &'a [Value]) -> &'a Value {
        match self {
            BoundOperand::Column(i) => &row[*i],
            BoundOperand::Const(v) => v,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum BoundPredicate {
    Compare {
        left: BoundOperand,
        op: super::ast::CmpOp,
        right: BoundOperand,
    },
    And(Box<BoundPredicate>, Box<BoundPredicate>),
    Or(Box<BoundPredicate>, Box<BoundPredicate>),
    Not(Box<BoundPredicate>),
}

impl BoundPredicate {
    pub fn bind(predicate: &Predicate, cols: &[Column]) -> Result<BoundPredicate, QueryError> {
        Ok(match predicate {
            Predicate::Compare { left, op, right } => {
                let lt = operand_type(left, cols)?;
                let rt = operand_type(right, cols)?;
                let l = bind_operand(left, cols, rt)?;
                let r = bind_operand(right, cols, lt)?;
                let (Some(lt), Some(rt)) = (lt.or(const_type(&l)), rt.or(const_type(&r))) else {
                    unreachable!("bound operands are typed")
                };
                if !lt.comparable_with(&rt) {
                    return Err(QueryError::TypeMismatch(format!(
                        "cannot compare {left} ({lt}) with {right} ({rt})"
                    )));
                }
                BoundPredicate::Compare { left: l, op: *op, right: r }
            }
            Predicate::And(a, b) => BoundPredicate::And(Box::new(Self::bind(a, cols)?), Box::new(Self::bind(b, cols)?)),
            Predicate::Or(a, b) => BoundPredicate::Or(Box::new(Self::bind(a, cols)?), Box::new(Self::bind(b, cols)?)),
            Predicate::Not(a) => BoundPredicate::Not(Box::new(Self::bind(a, cols)?)),
        })
    }

    pub fn eval(&self, row: &[Value]) -> bool {
        match self {
            BoundPredicate::Compare { left, op, right } => {
                let ord = left
                    .value(row)
                    .compare(right.value(row))
                    .expect("operands are type-checked at bind time");
                op.holds(ord)
            }
            BoundPredicate::And(a, b) => a.eval(row) && b.eval(row),
            BoundPredicate::Or(a, b) => a.eval(row) || b.eval(row),
            BoundPredicate::Not(a) => !a.eval(row),
        }
    }
}

fn const_type(op: &BoundOperand) -> Option<AttributeType> {
    match op {
        BoundOperand::Column(_) => None,
        BoundOperand::Const(Value::Integer(_)) => Some(AttributeType::Integer),
        BoundOperand::Const(Value::Decimal { scale, .. }) => Some(AttributeType::Decimal {
            precision: crate::data_model::MAX_DECIMAL_PRECISION,
            scale: *scale,
        }),
        BoundOperand::Const(Value::Text(_)) => Some(AttributeType::Text),
        BoundOperand::Const(Value::Boolean(_)) => Some(AttributeType::Boolean),
    }
}

fn operand_type(op: &Operand, cols: &[Column]) -> Result<Option<AttributeType>, QueryError> {
    match op {
        Operand::Attribute(name) => position(cols, name)
            .map(|i| Some(cols[i].ty))
            .ok_or_else(|| QueryError::UnknownAttribute(name.clone())),
        Operand::Literal(_) => Ok(None),
    }
}

fn bind_operand(op: &Operand, cols: &[Column], other: Option<AttributeType>) -> Result<BoundOperand, QueryError> {
    match op {
        Operand::Attribute(name) => position(cols, name)
            .map(BoundOperand::Column)
            .ok_or_else(|| QueryError::UnknownAttribute(name.clone())),
        Operand::Literal(lit) => literal_value(lit, other).map(BoundOperand::Const),
    }
}

/// Types a literal against the type of the attribute it is compared with.
pub(crate) fn literal_value(lit: &Literal, other: Option<AttributeType>) -> Result<Value, QueryError> {
    let mismatch = |ty: AttributeType| QueryError::TypeMismatch(format!("literal {lit} is not comparable with {ty}"));
    match (lit, other) {
        (Literal::Number(n), Some(AttributeType::Integer)) => n.parse().map(Value::Integer).map_err(|_| mismatch(AttributeType::Integer)),
        (Literal::Number(n), None | Some(AttributeType::Decimal { .. })) => {
            Value::decimal_literal(n).ok_or_else(|| QueryError::TypeMismatch(format!("malformed number {n}")))
        }
        (Literal::Text(s), None | Some(AttributeType::Text)) => Ok(Value::Text(s.clone())),
        (Literal::Boolean(b), None | Some(AttributeType::Boolean)) => Ok(Value::Boolean(*b)),
        (_, Some(ty)) => Err(mismatch(ty)),
    }
}
