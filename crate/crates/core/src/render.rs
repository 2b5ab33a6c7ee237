//! Serialization helpers that emit values in their display form.

use std::fmt::Display;

use serde::ser::SerializeMap;
use serde::Serializer;

pub(crate) fn as_display<T: Display, S: Serializer>(value: &T, serializer: S) -> Result<S::Ok, S::Error> {
    serializer.collect_str(value)
}

/// `[(name, value)]` as an ordered JSON object of display strings.
pub(crate) fn pairs_as_display<K: Display, V: Display, S: Serializer>(
    pairs: &[(K, V)],
    serializer: S,
) -> Result<S::Ok, S::Error> {
    let mut map = serializer.serialize_map(Some(pairs.len()))?;
    for (k, v) in pairs {
        map.serialize_entry(&k.to_string(), &v.to_string())?;
    }
    map.end()
}

pub(crate) fn opt_as_display<T: Display, S: Serializer>(value: &Option<T>, serializer: S) -> Result<S::Ok, S::Error> {
    match value {
        Some(v) => serializer.collect_str(v),
        None => serializer.serialize_none(),
    }
}
