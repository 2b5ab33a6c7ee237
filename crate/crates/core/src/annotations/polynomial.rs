use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AnnotationError, WitnessBasis};
use crate::data_model::ProvenanceId;

/// One term `k * x1 * ... * xn`. An empty variable list is the constant `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub coefficient: u64,
    /// Sorted; repeated variables encode exponents.
    pub variables: Vec<ProvenanceId>,
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        render_term(f, self.coefficient, &self.variables)
    }
}

fn render_term(f: &mut fmt::Formatter<'_>, coefficient: u64, variables: &[ProvenanceId]) -> fmt::Result {
    if variables.is_empty() {
        return write!(f, "{coefficient}");
    }
    if coefficient > 1 {
        write!(f, "{coefficient}*")?;
    }
    for (i, v) in variables.iter().enumerate() {
        if i > 0 {
            f.write_str("*")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

/// An element of the provenance semiring N[X], kept in canonical form.
///
/// Keys are sorted variable multisets; values are non-zero coefficients.
/// The derived equality is therefore equality of canonical forms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    terms: BTreeMap<Vec<ProvenanceId>, u64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn constant(k: u64) -> Self {
        let mut p = Self::zero();
        p.add_term(Vec::new(), k);
        p
    }

    pub fn variable(id: ProvenanceId) -> Self {
        let mut p = Self::zero();
        p.add_term(vec![id], 1);
        p
    }

    /// Builds a polynomial from arbitrary terms, canonicalizing as it goes.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (u64, Vec<ProvenanceId>)>,
    {
        let mut p = Self::zero();
        for (k, mut vars) in terms {
            vars.sort();
            p.add_term(vars, k);
        }
        p
    }

    fn add_term(&mut self, sorted_vars: Vec<ProvenanceId>, k: u64) {
        if k == 0 {
            return;
        }
        let slot = self.terms.entry(sorted_vars).or_insert(0);
        *slot = slot.checked_add(k).expect("provenance coefficient overflow");
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn monomial_count(&self) -> usize {
        self.terms.len()
    }

    pub fn monomials(&self) -> impl Iterator<Item = Monomial> + '_ {
        self.terms
            .iter()
            .map(|(vars, k)| Monomial { coefficient: *k, variables: vars.clone() })
    }

    /// Distinct variables occurring anywhere in the polynomial.
    pub fn variables(&self) -> BTreeSet<ProvenanceId> {
        self.terms.keys().flatten().cloned().collect()
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (vars, k) in &other.terms {
            out.add_term(vars.clone(), *k);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (va, ka) in &self.terms {
            for (vb, kb) in &other.terms {
                let mut vars = Vec::with_capacity(va.len() + vb.len());
                vars.extend(va.iter().cloned());
                vars.extend(vb.iter().cloned());
                vars.sort();
                out.add_term(vars, ka.checked_mul(*kb).expect("provenance coefficient overflow"));
            }
        }
        out
    }

    /// Why-provenance: each monomial becomes the set of its distinct variables.
    pub fn to_witness_basis(&self) -> WitnessBasis {
        WitnessBasis::from_witnesses(
            self.terms
                .keys()
                .filter(|vars| !vars.is_empty())
                .map(|vars| vars.iter().cloned().collect::<BTreeSet<_>>()),
        )
        .expect("non-empty variable sets always form a valid basis")
    }

    /// Evaluates in N; `assignment` must cover every variable.
    pub fn specialize(&self, assignment: &BTreeMap<ProvenanceId, u64>) -> Result<u64, AnnotationError> {
        let mut total: u64 = 0;
        for (vars, k) in &self.terms {
            let mut term = *k;
            for v in vars {
                let x = assignment
                    .get(v)
                    .ok_or_else(|| AnnotationError::MissingVariable(v.clone()))?;
                term = term.checked_mul(*x).ok_or(AnnotationError::Overflow)?;
            }
            total = total.checked_add(term).ok_or(AnnotationError::Overflow)?;
        }
        Ok(total)
    }

    /// Substitutes variables and re-canonicalizes; collided monomials merge.
    pub fn rename_variables(&self, mapping: &BTreeMap<ProvenanceId, ProvenanceId>) -> Result<Polynomial, AnnotationError> {
        self.try_rename(|v| mapping.get(v).cloned().ok_or_else(|| AnnotationError::MissingVariable(v.clone())))
    }

    pub(crate) fn try_rename<E>(&self, mut f: impl FnMut(&ProvenanceId) -> Result<ProvenanceId, E>) -> Result<Polynomial, E> {
        let mut out = Polynomial::zero();
        for (vars, k) in &self.terms {
            let mut renamed = vars.iter().map(&mut f).collect::<Result<Vec<_>, E>>()?;
            renamed.sort();
            out.add_term(renamed, *k);
        }
        Ok(out)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (vars, k)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            render_term(f, *k, vars)?;
        }
        Ok(())
    }
}

impl FromStr for Polynomial {
    type Err = AnnotationError;

    /// Parses the canonical rendering (and any reordering of it).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = |why: &str| AnnotationError::Parse(format!("{why} in {s:?}"));
        if s == "0" {
            return Ok(Polynomial::zero());
        }
        let mut terms = Vec::new();
        for term in s.split('+') {
            let term = term.trim();
            if term.is_empty() {
                return Err(bad("empty term"));
            }
            let mut coefficient: u64 = 1;
            let mut vars = Vec::new();
            for (i, factor) in term.split('*').map(str::trim).enumerate() {
                if factor.is_empty() {
                    return Err(bad("empty factor"));
                }
                if factor.bytes().all(|b| b.is_ascii_digit()) {
                    if i != 0 {
                        return Err(bad("coefficient must lead its term"));
                    }
                    coefficient = factor.parse().map_err(|_| bad("coefficient too large"))?;
                } else {
                    vars.push(factor.parse::<ProvenanceId>().map_err(|e| bad(&e.to_string()))?);
                }
            }
            terms.push((coefficient, vars));
        }
        Ok(Polynomial::from_terms(terms))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::add(self, rhs)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::mul(self, rhs)
    }
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
