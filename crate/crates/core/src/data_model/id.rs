use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{is_identifier, DataError};

/// Identifier of a source tuple (or, after lifting, of a file).
///
/// Rendered `base` or `base@t<version>`; ordering is the lexicographic order
/// of that rendering.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProvenanceId {
    base: String,
    version: Option<u64>,
}

impl ProvenanceId {
    pub fn new(base: impl Into<String>) -> Result<Self, DataError> {
        let base = base.into();
        if !is_identifier(&base) {
            return Err(DataError::InvalidId(base));
        }
        Ok(ProvenanceId { base, version: None })
    }

    pub fn versioned(base: impl Into<String>, version: u64) -> Result<Self, DataError> {
        let mut id = ProvenanceId::new(base)?;
        id.version = Some(version);
        Ok(id)
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn version(&self) -> Option<u64> {
        self.version
    }

    pub fn without_version(&self) -> ProvenanceId {
        ProvenanceId { base: self.base.clone(), version: None }
    }
}

impl fmt::Display for ProvenanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.version {
            Some(v) => write!(f, "{}@t{v}", self.base),
            None => f.write_str(&self.base),
        }
    }
}

impl FromStr for ProvenanceId {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s.split_once('@') {
            None => ProvenanceId::new(s),
            Some((base, suffix)) => {
                let version = suffix
                    .strip_prefix('t')
                    .and_then(|v| if v.bytes().all(|b| b.is_ascii_digit()) { v.parse().ok() } else { None })
                    .ok_or_else(|| DataError::InvalidId(s.to_string()))?;
                ProvenanceId::versioned(base, version)
            }
        }
    }
}

impl Ord for ProvenanceId {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.version.is_none() && other.version.is_none() {
            return self.base.cmp(&other.base);
        }
        self.to_string().cmp(&other.to_string())
    }
}

impl PartialOrd for ProvenanceId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Serialize for ProvenanceId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ProvenanceId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_and_parses() {
        let id: ProvenanceId = "r2@t1".parse().unwrap();
        assert_eq!(id.base(), "r2");
        assert_eq!(id.version(), Some(1));
        assert_eq!(id.to_string(), "r2@t1");
        assert_eq!("r1".parse::<ProvenanceId>().unwrap().to_string(), "r1");
        assert!("r1@x".parse::<ProvenanceId>().is_err());
        assert!("r1@t".parse::<ProvenanceId>().is_err());
        assert!("1r".parse::<ProvenanceId>().is_err());
        assert!("a*b".parse::<ProvenanceId>().is_err());
    }

    #[test]
    fn ordering_follows_rendering() {
        let mut ids: Vec<ProvenanceId> =
            ["s1", "r2@t2", "r1", "r2@t1", "r10"].iter().map(|s| s.parse().unwrap()).collect();
        ids.sort();
        let rendered: Vec<String> = ids.iter().map(ToString::to_string).collect();
        assert_eq!(rendered, ["r1", "r10", "r2@t1", "r2@t2", "s1"]);
    }
}
