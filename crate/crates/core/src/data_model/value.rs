use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{AttributeType, DataError};

/// A typed scalar. Decimals are exact: `scaled / 10^scale`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    Integer(i64),
    Decimal { scaled: i64, scale: u8 },
    Text(String),
    Boolean(bool),
}

impl Value {
    /// Parses `text` as a value of type `ty`, checking precision and scale.
    pub fn parse(text: &str, ty: &AttributeType) -> Result<Value, DataError> {
        let raw = text.trim();
        let mismatch = || DataError::InvalidValue { text: raw.to_string(), ty: *ty };
        match *ty {
            AttributeType::Integer => raw.parse().map(Value::Integer).map_err(|_| mismatch()),
            AttributeType::Decimal { precision, scale } => {
                let (scaled, natural) = parse_decimal(raw).ok_or_else(mismatch)?;
                if natural > scale {
                    return Err(mismatch());
                }
                let scaled = scaled
                    .checked_mul(10i64.pow(u32::from(scale - natural)))
                    .ok_or_else(mismatch)?;
                if scaled.unsigned_abs() >= 10u64.pow(u32::from(precision)) {
                    return Err(mismatch());
                }
                Ok(Value::Decimal { scaled, scale })
            }
            AttributeType::Text => Ok(Value::Text(text.to_string())),
            AttributeType::Boolean => match raw.to_ascii_lowercase().as_str() {
                "true" => Ok(Value::Boolean(true)),
                "false" => Ok(Value::Boolean(false)),
                _ => Err(mismatch()),
            },
        }
    }

    /// A decimal literal at its natural scale, e.g. `"1.30"` → scaled 130, scale 2.
    pub fn decimal_literal(text: &str) -> Option<Value> {
        parse_decimal(text.trim()).map(|(scaled, scale)| Value::Decimal { scaled, scale })
    }

    pub fn conforms_to(&self, ty: &AttributeType) -> bool {
        match (self, ty) {
            (Value::Integer(_), AttributeType::Integer) => true,
            (Value::Decimal { scaled, scale }, AttributeType::Decimal { precision, scale: s }) => {
                scale == s && scaled.unsigned_abs() < 10u64.pow(u32::from(*precision))
            }
            (Value::Text(_), AttributeType::Text) => true,
            (Value::Boolean(_), AttributeType::Boolean) => true,
            _ => false,
        }
    }

    pub fn comparable_with_type(&self, ty: &AttributeType) -> bool {
        matches!(
            (self, ty),
            (Value::Integer(_), AttributeType::Integer)
                | (Value::Decimal { .. }, AttributeType::Decimal { .. })
                | (Value::Text(_), AttributeType::Text)
                | (Value::Boolean(_), AttributeType::Boolean)
        )
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Integer(_) => "int",
            Value::Decimal { .. } => "decimal",
            Value::Text(_) => "text",
            Value::Boolean(_) => "bool",
        }
    }

    /// Exact comparison between values of comparable types.
    pub fn compare(&self, other: &Value) -> Result<Ordering, DataError> {
        match (self, other) {
            (Value::Integer(a), Value::Integer(b)) => Ok(a.cmp(b)),
            (Value::Decimal { scaled: a, scale: sa }, Value::Decimal { scaled: b, scale: sb }) => {
                Ok(cmp_decimal(*a, *sa, *b, *sb))
            }
            (Value::Text(a), Value::Text(b)) => Ok(a.cmp(b)),
            (Value::Boolean(a), Value::Boolean(b)) => Ok(a.cmp(b)),
            _ => Err(DataError::Incomparable {
                left: self.kind_name(),
                right: other.kind_name(),
            }),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Integer(_) => 0,
            Value::Decimal { .. } => 1,
            Value::Text(_) => 2,
            Value::Boolean(_) => 3,
        }
    }
}

fn cmp_decimal(a: i64, sa: u8, b: i64, sb: u8) -> Ordering {
    let (a, b) = (i128::from(a), i128::from(b));
    if sa >= sb {
        a.cmp(&(b * 10i128.pow(u32::from(sa - sb))))
    } else {
        (a * 10i128.pow(u32::from(sb - sa))).cmp(&b)
    }
}

/// Returns `(scaled, scale)` for `[-+]digits[.digits]`.
fn parse_decimal(s: &str) -> Option<(i64, u8)> {
    let (negative, body) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if body.ends_with('.') {
        return None;
    }
    let scale = u8::try_from(frac_part.len()).ok().filter(|s| *s <= 18)?;
    let digits = format!("{int_part}{frac_part}");
    let magnitude: i64 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    Some((if negative { -magnitude } else { magnitude }, scale))
}

// Total order used for sorting result rows. Values of the same column share a
// type, so the cross-type rank only matters for heterogeneous containers.
impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Decimal { scaled: a, scale: sa }, Value::Decimal { scaled: b, scale: sb }) => {
                cmp_decimal(*a, *sa, *b, *sb).then(sa.cmp(sb))
            }
            _ => self
                .compare(other)
                .unwrap_or_else(|_| self.rank().cmp(&other.rank())),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Integer(v) => write!(f, "{v}"),
            Value::Decimal { scaled, scale } => {
                if *scale == 0 {
                    return write!(f, "{scaled}");
                }
                let unit = 10u64.pow(u32::from(*scale));
                let magnitude = scaled.unsigned_abs();
                let sign = if *scaled < 0 { "-" } else { "" };
                write!(
                    f,
                    "{sign}{}.{:0width$}",
                    magnitude / unit,
                    magnitude % unit,
                    width = usize::from(*scale)
                )
            }
            Value::Text(s) => f.write_str(s),
            Value::Boolean(b) => write!(f, "{b}"),
        }
    }
}
