//! Recursive-descent parser for the SQL subset
//!
//! ```text
//! query     := SELECT (* | ident (, ident)*) FROM ident (NATURAL JOIN ident)* (WHERE pred)?
//! pred      := conj (OR conj)*
//! conj      := unary (AND unary)*
//! unary     := NOT unary | ( pred ) | operand cmp operand
//! operand   := ident | number | 'text' | TRUE | FALSE
//! ```

use super::ast::{AlgebraExpr, CmpOp, Literal, Operand, Predicate, Projection};
use super::QueryError;
use crate::data_model::Value;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    Star,
    Comma,
    LParen,
    RParen,
    Cmp(CmpOp),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn syntax(token: usize, offset: usize, message: impl Into<String>) -> QueryError {
    QueryError::Syntax { token, offset, message: message.into() }
}

fn tokenize(text: &str) -> Result<Vec<Token>, QueryError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'*' => {
                i += 1;
                Tok::Star
            }
            b',' => {
                i += 1;
                Tok::Comma
            }
            b'(' => {
                i += 1;
                Tok::LParen
            }
            b')' => {
                i += 1;
                Tok::RParen
            }
            b'<' | b'>' | b'=' | b'!' => {
                let next = bytes.get(i + 1).copied();
                let (op, len) = match (c, next) {
                    (b'<', Some(b'=')) => (CmpOp::Le, 2),
                    (b'<', Some(b'>')) => (CmpOp::Ne, 2),
                    (b'<', _) => (CmpOp::Lt, 1),
                    (b'>', Some(b'=')) => (CmpOp::Ge, 2),
                    (b'>', _) => (CmpOp::Gt, 1),
                    (b'=', _) => (CmpOp::Eq, 1),
                    (b'!', Some(b'=')) => (CmpOp::Ne, 2),
                    _ => return Err(syntax(out.len() + 1, start, "unexpected '!'")),
                };
                i += len;
                Tok::Cmp(op)
            }
            b'\'' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match bytes.get(i) {
                        None => return Err(syntax(out.len() + 1, start, "unterminated string literal")),
                        Some(b'\'') if bytes.get(i + 1) == Some(&b'\'') => {
                            s.push('\'');
                            i += 2;
                        }
                        Some(b'\'') => {
                            i += 1;
                            break;
                        }
                        Some(_) => {
                            let ch = text[i..].chars().next().expect("in bounds");
                            s.push(ch);
                            i += ch.len_utf8();
                        }
                    }
                }
                Tok::Str(s)
            }
            b'0'..=b'9' | b'-' | b'.' => {
                i += 1;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                let lit = &text[start..i];
                if Value::decimal_literal(lit).is_none() {
                    return Err(syntax(out.len() + 1, start, format!("malformed number {lit:?}")));
                }
                Tok::Number(lit.to_string())
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                Tok::Ident(text[start..i].to_string())
            }
            _ => {
                let ch = text[i..].chars().next().expect("in bounds");
                return Err(syntax(out.len() + 1, start, format!("unexpected character {ch:?}")));
            }
        };
        out.push(Token { tok, offset: start });
    }
    Ok(out)
}

const KEYWORDS: &[&str] = &["SELECT", "FROM", "NATURAL", "JOIN", "WHERE", "AND", "OR", "NOT", "TRUE", "FALSE"];

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    text: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    /// 1-based index of the current token (EOF is one past the last token).
    fn token_no(&self) -> usize {
        self.pos + 1
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.text.len(), |t| t.offset)
    }

    fn err(&self, expected: &str) -> QueryError {
        let found = match self.peek() {
            None => "end of input".to_string(),
            Some(Tok::Ident(s)) | Some(Tok::Number(s)) => format!("{s:?}"),
            Some(Tok::Str(s)) => format!("'{s}'"),
            Some(Tok::Star) => "'*'".into(),
            Some(Tok::Comma) => "','".into(),
            Some(Tok::LParen) => "'('".into(),
            Some(Tok::RParen) => "')'".into(),
            Some(Tok::Cmp(op)) => format!("'{}'", op.symbol()),
        };
        syntax(self.token_no(), self.offset(), format!("expected {expected}, found {found}"))
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s.eq_ignore_ascii_case(kw))
    }

    fn keyword(&mut self, kw: &str) -> Result<(), QueryError> {
        if self.is_keyword(kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(kw))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, QueryError> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.iter().any(|k| s.eq_ignore_ascii_case(k)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err(what)),
        }
    }

    fn query(&mut self) -> Result<AlgebraExpr, QueryError> {
        self.keyword("SELECT")?;
        let columns = if self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            Projection::All
        } else {
            let mut cols = vec![self.ident("attribute name or '*'")?];
            while self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                cols.push(self.ident("attribute name")?);
            }
            Projection::Columns(cols)
        };
        self.keyword("FROM")?;
        let mut from = AlgebraExpr::scan(self.ident("relation name")?);
        while self.is_keyword("NATURAL") {
            self.pos += 1;
            self.keyword("JOIN")?;
            from = from.join(AlgebraExpr::scan(self.ident("relation name")?));
        }
        if self.is_keyword("WHERE") {
            self.pos += 1;
            let predicate = self.disjunction()?;
            from = from.select(predicate);
        }
        if self.pos < self.tokens.len() {
            return Err(self.err("end of query"));
        }
        Ok(AlgebraExpr::Project { columns, input: Box::new(from) })
    }

    fn disjunction(&mut self) -> Result<Predicate, QueryError> {
        let mut left = self.conjunction()?;
        while self.is_keyword("OR") {
            self.pos += 1;
            left = left.or(self.conjunction()?);
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> Result<Predicate, QueryError> {
        let mut left = self.unary()?;
        while self.is_keyword("AND") {
            self.pos += 1;
            left = left.and(self.unary()?);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Predicate, QueryError> {
        if self.is_keyword("NOT") {
            self.pos += 1;
            return Ok(self.unary()?.not());
        }
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let inner = self.disjunction()?;
            if self.peek() != Some(&Tok::RParen) {
                return Err(self.err("')'"));
            }
            self.pos += 1;
            return Ok(inner);
        }
        let left = self.operand()?;
        let op = match self.peek() {
            Some(Tok::Cmp(op)) => *op,
            _ => return Err(self.err("comparison operator")),
        };
        self.pos += 1;
        let right = self.operand()?;
        Ok(Predicate::compare(left, op, right))
    }

    fn operand(&mut self) -> Result<Operand, QueryError> {
        let op = match self.peek() {
            Some(Tok::Number(n)) => Operand::Literal(Literal::Number(n.clone())),
            Some(Tok::Str(s)) => Operand::Literal(Literal::Text(s.clone())),
            Some(Tok::Ident(s)) if s.eq_ignore_ascii_case("TRUE") => Operand::Literal(Literal::Boolean(true)),
            Some(Tok::Ident(s)) if s.eq_ignore_ascii_case("FALSE") => Operand::Literal(Literal::Boolean(false)),
            _ => return self.ident("operand").map(Operand::Attribute),
        };
        self.pos += 1;
        Ok(op)
    }
}

/// Parses a query into `Project(cols, Select(pred, joins))`; the `Select`
/// is omitted without `WHERE`. Names are resolved later, at evaluation.
pub fn parse_query(text: &str) -> Result<AlgebraExpr, QueryError> {
    let tokens = tokenize(text)?;
    Parser { tokens, pos: 0, text }.query()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_comparison_query() {
        let q = parse_query("SELECT voltage_2 FROM R NATURAL JOIN S WHERE intensity_1 < intensity_2").unwrap();
        let expected = AlgebraExpr::scan("R")
            .join(AlgebraExpr::scan("S"))
            .select(Predicate::compare(Operand::attr("intensity_1"), CmpOp::Lt, Operand::attr("intensity_2")))
            .project(["voltage_2"]);
        assert_eq!(q, expected);
    }

    #[test]
    fn star_projects_everything() {
        assert_eq!(parse_query("SELECT * FROM R").unwrap(), AlgebraExpr::scan("R").project_all());
    }

    #[test]
    fn keywords_are_case_insensitive_and_joins_left_associative() {
        let q = parse_query("select a from R natural join S natural join T").unwrap();
        let expected = AlgebraExpr::scan("R")
            .join(AlgebraExpr::scan("S"))
            .join(AlgebraExpr::scan("T"))
            .project(["a"]);
        assert_eq!(q, expected);
    }

    #[test]
    fn error_reports_token_position() {
        match parse_query("SELECT FROM").unwrap_err() {
            QueryError::Syntax { token, offset, .. } => {
                assert_eq!(token, 2);
                assert_eq!(offset, 7);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_query("SELECT a FROM R WHERE").unwrap_err(), QueryError::Syntax { token: 6, offset: 21, .. }));
        assert!(parse_query("SELECT a FROM R extra").is_err());
        assert!(parse_query("SELECT a FROM R WHERE a < 'x").is_err());
        assert!(parse_query("SELECT a FROM R WHERE a < 1.2.3").is_err());
    }

    #[test]
    fn predicate_precedence() {
        let q = parse_query("SELECT a FROM R WHERE NOT a = 1 OR b <> 'x' AND (c >= 2.5 OR d = TRUE)").unwrap();
        let AlgebraExpr::Project { input, .. } = q else { panic!() };
        let AlgebraExpr::Select { predicate, .. } = *input else { panic!() };
        assert!(matches!(predicate, Predicate::Or(..)));
        assert_eq!(predicate.to_string(), "NOT a = 1 OR b <> 'x' AND (c >= 2.5 OR d = TRUE)");
    }

    #[test]
    fn rendering_reparses_to_same_tree() {
        let text = "SELECT a, b FROM R WHERE (a < 1 OR b = 'it''s') AND NOT c > -3";
        let q = parse_query(text).unwrap();
        let AlgebraExpr::Project { input, .. } = &q else { panic!() };
        let AlgebraExpr::Select { predicate, .. } = input.as_ref() else { panic!() };
        let again = parse_query(&format!("SELECT a, b FROM R WHERE {predicate}")).unwrap();
        assert_eq!(again, q);
    }
}
