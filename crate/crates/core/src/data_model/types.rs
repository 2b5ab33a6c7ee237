use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DataError;

/// Largest decimal precision we can hold in an `i64` scaled representation.
pub const MAX_DECIMAL_PRECISION: u8 = 18;

/// Declared type of a relation attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttributeType {
    Integer,
    Decimal { precision: u8, scale: u8 },
    Text,
    Boolean,
}

impl AttributeType {
    pub fn decimal(precision: u8, scale: u8) -> Result<Self, DataError> {
        let ty = AttributeType::Decimal { precision, scale };
        ty.validate()?;
        Ok(ty)
    }

    pub fn validate(&self) -> Result<(), DataError> {
        if let AttributeType::Decimal { precision, scale } = *self {
            if precision == 0 || precision > MAX_DECIMAL_PRECISION || scale > precision {
                return Err(DataError::InvalidDecimal { precision, scale });
            }
        }
        Ok(())
    }

    /// Two types whose values may be compared with each other.
    ///
    /// Decimals of different precision/scale compare exactly after rescaling.
    pub fn comparable_with(&self, other: &AttributeType) -> bool {
        matches!(
            (self, other),
            (AttributeType::Integer, AttributeType::Integer)
                | (AttributeType::Decimal { .. }, AttributeType::Decimal { .. })
                | (AttributeType::Text, AttributeType::Text)
                | (AttributeType::Boolean, AttributeType::Boolean)
        )
    }
}

impl fmt::Display for AttributeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeType::Integer => f.write_str("int"),
            AttributeType::Decimal { precision, scale } => write!(f, "decimal({precision},{scale})"),
            AttributeType::Text => f.write_str("text"),
            AttributeType::Boolean => f.write_str("bool"),
        }
    }
}

impl FromStr for AttributeType {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "int" | "integer" => return Ok(AttributeType::Integer),
            "text" | "string" => return Ok(AttributeType::Text),
            "bool" | "boolean" => return Ok(AttributeType::Boolean),
            _ => {}
        }
        let bad = || DataError::UnknownType(s.trim().to_string());
        let inner = t
            .strip_prefix("decimal(")
            .and_then(|rest| rest.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (p, s) = inner.split_once(',').ok_or_else(bad)?;
        let precision: u8 = p.trim().parse().map_err(|_| bad())?;
        let scale: u8 = s.trim().parse().map_err(|_| bad())?;
        AttributeType::decimal(precision, scale)
    }
}

impl Serialize for AttributeType {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AttributeType {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Identifiers for relations and attributes: ASCII letter or `_` first, then
/// letters, digits or `_`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: AttributeType,
}

impl Attribute {
    pub fn new(name: impl Into<String>, ty: AttributeType) -> Self {
        Attribute { name: name.into(), ty }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub relation_name: String,
    pub attributes: Vec<Attribute>,
}

impl Schema {
    pub fn new(relation_name: impl Into<String>, attributes: Vec<Attribute>) -> Result<Self, DataError> {
        let schema = Schema { relation_name: relation_name.into(), attributes };
        schema.validate()?;
        Ok(schema)
    }

    /// Parses a `name:type,name:type` declaration.
    pub fn parse(relation_name: &str, decl: &str) -> Result<Self, DataError> {
        let mut attributes = Vec::new();
        for part in split_top_level(decl) {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (name, ty) = part
                .split_once(':')
                .ok_or_else(|| DataError::InvalidSchema(format!("expected name:type, got {part:?}")))?;
            attributes.push(Attribute::new(name.trim(), ty.parse()?));
        }
        Schema::new(relation_name, attributes)
    }

    pub fn validate(&self) -> Result<(), DataError> {
        if !is_identifier(&self.relation_name) {
            return Err(DataError::InvalidSchema(format!(
                "invalid relation name {:?}",
                self.relation_name
            )));
        }
        if self.attributes.is_empty() {
            return Err(DataError::InvalidSchema("empty schema".into()));
        }
        for (i, attr) in self.attributes.iter().enumerate() {
            if !is_identifier(&attr.name) {
                return Err(DataError::InvalidSchema(format!("invalid attribute name {:?}", attr.name)));
            }
            attr.ty.validate()?;
            if self.attributes[..i].iter().any(|a| a.name == attr.name) {
                return Err(DataError::InvalidSchema(format!("duplicate attribute {}", attr.name)));
            }
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.attributes.len()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.relation_name)?;
        for (i, a) in self.attributes.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}:{}", a.name, a.ty)?;
        }
        f.write_str(")")
    }
}

// `decimal(6,3)` contains a comma, so split only outside parentheses.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}
