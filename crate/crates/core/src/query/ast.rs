use std::fmt;

/// Relational algebra over named attributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlgebraExpr {
    Scan(String),
    Select { predicate: Predicate, input: Box<AlgebraExpr> },
    Project { columns: Projection, input: Box<AlgebraExpr> },
    NaturalJoin { left: Box<AlgebraExpr>, right: Box<AlgebraExpr> },
    Union { left: Box<AlgebraExpr>, right: Box<AlgebraExpr> },
}

impl AlgebraExpr {
    pub fn scan(relation: impl Into<String>) -> Self {
        AlgebraExpr::Scan(relation.into())
    }

    pub fn select(self, predicate: Predicate) -> Self {
        AlgebraExpr::Select { predicate, input: Box::new(self) }
    }

    pub fn project<S: Into<String>>(self, columns: impl IntoIterator<Item = S>) -> Self {
        AlgebraExpr::Project {
            columns: Projection::Columns(columns.into_iter().map(Into::into).collect()),
            input: Box::new(self),
        }
    }

    pub fn project_all(self) -> Self {
        AlgebraExpr::Project { columns: Projection::All, input: Box::new(self) }
    }

    pub fn join(self, right: AlgebraExpr) -> Self {
        AlgebraExpr::NaturalJoin { left: Box::new(self), right: Box::new(right) }
    }

    pub fn union(self, right: AlgebraExpr) -> Self {
        AlgebraExpr::Union { left: Box::new(self), right: Box::new(right) }
    }

    pub fn depth(&self) -> usize {
        match self {
            AlgebraExpr::Scan(_) => 0,
            AlgebraExpr::Select { input, .. } | AlgebraExpr::Project { input, .. } => 1 + input.depth(),
            AlgebraExpr::NaturalJoin { left, right } | AlgebraExpr::Union { left, right } => {
                1 + left.depth().max(right.depth())
            }
        }
    }

    /// Scanned relations, left to right, with repeats.
    pub fn scans(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_scans(&mut out);
        out
    }

    fn collect_scans<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            AlgebraExpr::Scan(r) => out.push(r),
            AlgebraExpr::Select { input, .. } | AlgebraExpr::Project { input, .. } => input.collect_scans(out),
            AlgebraExpr::NaturalJoin { left, right } | AlgebraExpr::Union { left, right } => {
                left.collect_scans(out);
                right.collect_scans(out);
            }
        }
    }
}

impl fmt::Display for AlgebraExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraExpr::Scan(r) => write!(f, "Scan {r}"),
            AlgebraExpr::Select { predicate, input } => write!(f, "Select[{predicate}]({input})"),
            AlgebraExpr::Project { columns, input } => write!(f, "Project[{columns}]({input})"),
            AlgebraExpr::NaturalJoin { left, right } => write!(f, "NaturalJoin({left}, {right})"),
            AlgebraExpr::Union { left, right } => write!(f, "Union({left}, {right})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    All,
    Columns(Vec<String>),
}

impl fmt::Display for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Projection::All => f.write_str("*"),
            Projection::Columns(cols) => f.write_str(&cols.join(", ")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Lt => ord == Less,
            CmpOp::Le => ord != Greater,
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
            CmpOp::Ge => ord != Less,
            CmpOp::Gt => ord == Greater,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "<>",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Literal {
    /// Numeric text as written; typed against the other operand.
    Number(String),
    Text(String),
    Boolean(bool),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Number(n) => f.write_str(n),
            Literal::Text(s) => write!(f, "'{}'", s.replace('\'', "''")),
            Literal::Boolean(b) => f.write_str(if *b { "TRUE" } else { "FALSE" }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operand {
    Attribute(String),
    Literal(Literal),
}

impl Operand {
    pub fn attr(name: impl Into<String>) -> Self {
        Operand::Attribute(name.into())
    }

    pub fn number(text: impl Into<String>) -> Self {
        Operand::Literal(Literal::Number(text.into()))
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Attribute(a) => f.write_str(a),
            Operand::Literal(l) => l.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    Compare { left: Operand, op: CmpOp, right: Operand },
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    Not(Box<Predicate>),
}

impl Predicate {
    pub fn compare(left: Operand, op: CmpOp, right: Operand) -> Self {
        Predicate::Compare { left, op, right }
    }

    pub fn and(self, other: Predicate) -> Self {
        Predicate::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Predicate) -> Self {
        Predicate::Or(Box::new(self), Box::new(other))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Predicate::Not(Box::new(self))
    }

    /// Top-level conjuncts, left to right.
    pub fn conjuncts(&self) -> Vec<&Predicate> {
        match self {
            Predicate::And(a, b) => {
                let mut out = a.conjuncts();
                out.extend(b.conjuncts());
                out
            }
            other => vec![other],
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Predicate::Or(..) => 1,
            Predicate::And(..) => 2,
            Predicate::Not(_) => 3,
            Predicate::Compare { .. } => 4,
        }
    }

    fn fmt_child(&self, child: &Predicate, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if child.precedence() < self.precedence() {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Compare { left, op, right } => write!(f, "{left} {} {right}", op.symbol()),
            Predicate::And(a, b) => {
                self.fmt_child(a, f)?;
                f.write_str(" AND ")?;
                self.fmt_child(b, f)
            }
            Predicate::Or(a, b) => {
                self.fmt_child(a, f)?;
                f.write_str(" OR ")?;
                self.fmt_child(b, f)
            }
            Predicate::Not(a) => {
                f.write_str("NOT ")?;
                if a.precedence() < 4 {
                    write!(f, "({a})")
                } else {
                    write!(f, "{a}")
                }
            }
        }
    }
}
