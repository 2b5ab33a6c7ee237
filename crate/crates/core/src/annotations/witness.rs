use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::AnnotationError;
use crate::data_model::ProvenanceId;

pub type Witness = BTreeSet<ProvenanceId>;

/// A set of witnesses, each a set of tuple IDs sufficient to reconstruct a
/// result tuple. Not minimized: supersets of other witnesses are kept.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "BTreeSet<Witness>", into = "BTreeSet<Witness>")]
pub struct WitnessBasis {
    witnesses: BTreeSet<Witness>,
}

impl WitnessBasis {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_witnesses<I: IntoIterator<Item = Witness>>(witnesses: I) -> Result<Self, AnnotationError> {
        let witnesses: BTreeSet<Witness> = witnesses.into_iter().collect();
        if witnesses.iter().any(BTreeSet::is_empty) {
            return Err(AnnotationError::EmptyWitness);
        }
        Ok(WitnessBasis { witnesses })
    }

    pub fn is_empty(&self) -> bool {
        self.witnesses.is_empty()
    }

    pub fn len(&self) -> usize {
        self.witnesses.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Witness> {
        self.witnesses.iter()
    }

    pub fn contains(&self, witness: &Witness) -> bool {
        self.witnesses.contains(witness)
    }

    pub fn union(&self, other: &WitnessBasis) -> WitnessBasis {
        WitnessBasis { witnesses: self.witnesses.union(&other.witnesses).cloned().collect() }
    }

    /// Every ID mentioned by any witness.
    pub fn ids(&self) -> BTreeSet<ProvenanceId> {
        self.witnesses.iter().flatten().cloned().collect()
    }
}

impl TryFrom<BTreeSet<Witness>> for WitnessBasis {
    type Error = AnnotationError;
    fn try_from(value: BTreeSet<Witness>) -> Result<Self, Self::Error> {
        WitnessBasis::from_witnesses(value)
    }
}

impl From<WitnessBasis> for BTreeSet<Witness> {
    fn from(value: WitnessBasis) -> Self {
        value.witnesses
    }
}

impl fmt::Display for WitnessBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, w) in self.witnesses.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str("{")?;
            for (j, id) in w.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{id}")?;
            }
            f.write_str("}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(ids: &[&str]) -> Witness {
        ids.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn rejects_empty_witness() {
        assert!(WitnessBasis::from_witnesses([w(&[])]).is_err());
    }

    #[test]
    fn keeps_supersets() {
        let b = WitnessBasis::from_witnesses([w(&["r1"]), w(&["r1", "s1"])]).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b.to_string(), "{{r1},{r1,s1}}");
    }

    #[test]
    fn json_shape() {
        let b = WitnessBasis::from_witnesses([w(&["r1", "s1"]), w(&["r1", "s3"])]).unwrap();
        let json = serde_json::to_string(&b).unwrap();
        assert_eq!(json, r#"[["r1","s1"],["r1","s3"]]"#);
        assert_eq!(serde_json::from_str::<WitnessBasis>(&json).unwrap(), b);
        assert!(serde_json::from_str::<WitnessBasis>("[[]]").is_err());
    }
}
