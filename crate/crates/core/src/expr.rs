//! The expression model.
//!
//! An [`Expression`] is a flat sum of [`Term`]s; a term is an exact rational
//! coefficient times a product of [`Factor`]s. Factors are opaque indexed
//! objects ([`Indexed`]) or an inert covariant derivative of a product
//! ([`Wrapped`]). Indices follow the Einstein convention: a label that occurs
//! once in a term is free, a label that occurs twice (once upper, once lower)
//! is a summed dummy.
//!
//! Zero is the empty sum. Products are distributed eagerly, so there is no
//! nested sum anywhere in the model.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Name of the Kronecker delta.
pub const KDELTA: &str = "kdelta";
/// Name of the second-kind Christoffel symbol, `ichr2([i,j],[k])`.
pub const ICHR2: &str = "ichr2";
/// Symbolic dimension produced by tracing a Kronecker delta.
pub const DIM: &str = "dim";

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn integer(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// An index label. Generated dummies live in the `%N` namespace, which the
/// script grammar never hands out for user labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexName(String);

impl IndexName {
    pub fn new(label: impl Into<String>) -> Self {
        IndexName(label.into())
    }

    pub fn generated(n: usize) -> Self {
        IndexName(format!("%{n}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The counter of a generated label (`%7` -> 7).
    pub fn generated_number(&self) -> Option<usize> {
        self.0.strip_prefix('%').and_then(|s| s.parse().ok())
    }

    pub fn is_generated(&self) -> bool {
        self.generated_number().is_some()
    }
}

impl fmt::Display for IndexName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for IndexName {
    fn from(s: &str) -> Self {
        IndexName::new(s)
    }
}

/// Smallest generated label not in `used`.
pub fn fresh_label(used: &BTreeSet<IndexName>) -> IndexName {
    (1..)
        .map(IndexName::generated)
        .find(|l| !used.contains(l))
        .expect("unbounded counter")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    Lower,
    Upper,
}

impl Variance {
    pub fn flip(self) -> Self {
        match self {
            Variance::Lower => Variance::Upper,
            Variance::Upper => Variance::Lower,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivKind {
    Ordinary,
    /// Inert covariant derivative; never reordered.
    Covariant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DerivSlot {
    pub index: IndexName,
    pub kind: DerivKind,
}

impl DerivSlot {
    pub fn ordinary(index: impl Into<IndexName>) -> Self {
        DerivSlot {
            index: index.into(),
            kind: DerivKind::Ordinary,
        }
    }

    pub fn covariant(index: impl Into<IndexName>) -> Self {
        DerivSlot {
            index: index.into(),
            kind: DerivKind::Covariant,
        }
    }
}

/// A named tensor with covariant, contravariant and derivative slots:
/// `T([a,b],[c,i],i2,i1)` is `T` with `cov = [a,b]`, `contra = [c,i]` and two
/// ordinary derivative slots.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Indexed {
    pub name: String,
    pub cov: Vec<IndexName>,
    pub contra: Vec<IndexName>,
    pub derivs: Vec<DerivSlot>,
}

impl Indexed {
    pub fn new<I, J>(name: impl Into<String>, cov: I, contra: J) -> Self
    where
        I: IntoIterator,
        I::Item: Into<IndexName>,
        J: IntoIterator,
        J::Item: Into<IndexName>,
    {
        Indexed {
            name: name.into(),
            cov: cov.into_iter().map(Into::into).collect(),
            contra: contra.into_iter().map(Into::into).collect(),
            derivs: Vec::new(),
        }
    }

    pub fn scalar(name: impl Into<String>) -> Self {
        Indexed {
            name: name.into(),
            cov: Vec::new(),
            contra: Vec::new(),
            derivs: Vec::new(),
        }
    }

    pub fn with_derivs<I>(mut self, derivs: I) -> Self
    where
        I: IntoIterator,
        I::Item: Into<IndexName>,
    {
        self.derivs.extend(derivs.into_iter().map(DerivSlot::ordinary));
        self
    }

    pub fn with_covariant(mut self, index: impl Into<IndexName>) -> Self {
        self.derivs.push(DerivSlot::covariant(index));
        self
    }

    /// Tensor rank, not counting derivative slots.
    pub fn rank(&self) -> usize {
        self.cov.len() + self.contra.len()
    }

    pub fn signature(&self) -> (usize, usize) {
        (self.cov.len(), self.contra.len())
    }

    pub fn has_covariant_derivs(&self) -> bool {
        self.derivs.iter().any(|d| d.kind == DerivKind::Covariant)
    }

    pub fn is_plain(&self) -> bool {
        self.derivs.is_empty()
    }
}

/// An inert covariant derivative applied to a product of factors, e.g.
/// `'covdiff(g([],[a,b])*phi([],[],b), a)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Wrapped {
    pub body: Vec<Factor>,
    pub derivs: Vec<DerivSlot>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Factor {
    Indexed(Indexed),
    Wrapped(Wrapped),
}

impl From<Indexed> for Factor {
    fn from(t: Indexed) -> Self {
        Factor::Indexed(t)
    }
}

impl Factor {
    pub fn as_indexed(&self) -> Option<&Indexed> {
        match self {
            Factor::Indexed(t) => Some(t),
            Factor::Wrapped(_) => None,
        }
    }

    pub fn derivs(&self) -> &[DerivSlot] {
        match self {
            Factor::Indexed(t) => &t.derivs,
            Factor::Wrapped(w) => &w.derivs,
        }
    }

    pub fn derivs_mut(&mut self) -> &mut Vec<DerivSlot> {
        match self {
            Factor::Indexed(t) => &mut t.derivs,
            Factor::Wrapped(w) => &mut w.derivs,
        }
    }

    /// Visits every index slot in traversal order: covariant, contravariant,
    /// then derivative slots (derivative slots count as lower). A wrapped
    /// product visits its body first.
    pub fn for_each_slot<'a>(&'a self, f: &mut impl FnMut(&'a IndexName, Variance)) {
        match self {
            Factor::Indexed(t) => {
                t.cov.iter().for_each(|i| f(i, Variance::Lower));
                t.contra.iter().for_each(|i| f(i, Variance::Upper));
                t.derivs.iter().for_each(|d| f(&d.index, Variance::Lower));
            }
            Factor::Wrapped(w) => {
                for b in &w.body {
                    b.for_each_slot(f);
                }
                w.derivs.iter().for_each(|d| f(&d.index, Variance::Lower));
            }
        }
    }

    pub fn for_each_slot_mut(&mut self, f: &mut impl FnMut(&mut IndexName)) {
        match self {
            Factor::Indexed(t) => {
                t.cov.iter_mut().for_each(&mut *f);
                t.contra.iter_mut().for_each(&mut *f);
                t.derivs.iter_mut().for_each(|d| f(&mut d.index));
            }
            Factor::Wrapped(w) => {
                for b in &mut w.body {
                    b.for_each_slot_mut(f);
                }
                w.derivs.iter_mut().for_each(|d| f(&mut d.index));
            }
        }
    }

    pub fn labels(&self) -> Vec<&IndexName> {
        let mut out = Vec::new();
        self.for_each_slot(&mut |i, _| out.push(i));
        out
    }

    fn collect_ranks(&self, ranks: &mut Vec<(String, usize)>) {
        match self {
            Factor::Indexed(t) => ranks.push((t.name.clone(), t.rank())),
            Factor::Wrapped(w) => w.body.iter().for_each(|b| b.collect_ranks(ranks)),
        }
    }

    pub fn is_named(&self, name: &str) -> bool {
        matches!(self, Factor::Indexed(t) if t.name == name)
    }
}

pub type FreeIndices = BTreeSet<(IndexName, Variance)>;

pub fn format_free(free: &FreeIndices) -> String {
    let parts: Vec<String> = free
        .iter()
        .map(|(i, v)| match v {
            Variance::Lower => format!("_{i}"),
            Variance::Upper => format!("^{i}"),
        })
        .collect();
    format!("{{{}}}", parts.join(", "))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Term {
    #[serde(with = "rational_string")]
    pub coeff: Rational,
    pub factors: Vec<Factor>,
}

impl Term {
    pub fn new(coeff: Rational, factors: Vec<Factor>) -> Self {
        Term { coeff, factors }
    }

    pub fn number(coeff: Rational) -> Self {
        Term {
            coeff,
            factors: Vec::new(),
        }
    }

    pub fn factor(f: impl Into<Factor>) -> Self {
        Term {
            coeff: Rational::one(),
            factors: vec![f.into()],
        }
    }

    /// Every slot occurrence, grouped by label, in traversal order.
    pub fn occurrences(&self) -> BTreeMap<&IndexName, Vec<Variance>> {
        let mut occ: BTreeMap<&IndexName, Vec<Variance>> = BTreeMap::new();
        for f in &self.factors {
            f.for_each_slot(&mut |i, v| occ.entry(i).or_default().push(v));
        }
        occ
    }

    /// Labels in order of first occurrence.
    pub fn labels_in_order(&self) -> Vec<IndexName> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for f in &self.factors {
            f.for_each_slot(&mut |i, _| {
                if seen.insert(i.clone()) {
                    out.push(i.clone());
                }
            });
        }
        out
    }

    pub fn labels(&self) -> BTreeSet<IndexName> {
        self.occurrences().into_keys().cloned().collect()
    }

    /// Checks the summation-convention invariants.
    pub fn validate(&self) -> Result<()> {
        for (label, vs) in self.occurrences() {
            match vs.len() {
                1 => {}
                2 if vs[0] != vs[1] => {}
                2 => return Err(Error::VarianceClash(label.to_string())),
                _ => return Err(Error::TripleIndex(label.to_string())),
            }
        }
        let mut ranks = Vec::new();
        for f in &self.factors {
            f.collect_ranks(&mut ranks);
        }
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        for (name, rank) in &ranks {
            if let Some(&r) = seen.get(name.as_str()) {
                if r != *rank {
                    return Err(Error::ArityMismatch {
                        name: name.clone(),
                        expected: r,
                        found: *rank,
                    });
                }
            } else {
                seen.insert(name, *rank);
            }
        }
        Ok(())
    }

    pub fn free_indices(&self) -> FreeIndices {
        self.occurrences()
            .into_iter()
            .filter(|(_, vs)| vs.len() == 1)
            .map(|(i, vs)| (i.clone(), vs[0]))
            .collect()
    }

    pub fn dummies(&self) -> BTreeSet<IndexName> {
        self.occurrences()
            .into_iter()
            .filter(|(_, vs)| vs.len() >= 2)
            .map(|(i, _)| i.clone())
            .collect()
    }

    /// Simultaneous relabeling; labels missing from `map` are kept.
    pub fn relabel(&mut self, map: &BTreeMap<IndexName, IndexName>) {
        for f in &mut self.factors {
            f.for_each_slot_mut(&mut |i| {
                if let Some(n) = map.get(i) {
                    *i = n.clone();
                }
            });
        }
    }

    /// Renames the dummies of `self` that appear in `avoid` to fresh labels.
    pub fn freshen_against(&mut self, avoid: &BTreeSet<IndexName>) {
        let mut used: BTreeSet<IndexName> = avoid.union(&self.labels()).cloned().collect();
        let mut map = BTreeMap::new();
        for d in self.dummies() {
            if avoid.contains(&d) {
                let n = fresh_label(&used);
                used.insert(n.clone());
                map.insert(d, n);
            }
        }
        if !map.is_empty() {
            self.relabel(&map);
        }
    }

    /// Product with dummy freshening: dummies on either side that would
    /// collide with an index of the other side are renamed; shared free
    /// labels contract.
    pub fn mul(&self, other: &Term) -> Term {
        let mut right = other.clone();
        right.freshen_against(&self.labels());
        let mut left = self.clone();
        let right_labels = right.labels();
        let left_dummies = left.dummies();
        if left_dummies.iter().any(|d| right_labels.contains(d)) {
            let avoid: BTreeSet<IndexName> = right_labels.union(&left.labels()).cloned().collect();
            let mut used = avoid.clone();
            let mut map = BTreeMap::new();
            for d in left_dummies.into_iter().filter(|d| right_labels.contains(d)) {
                let n = fresh_label(&used);
                used.insert(n.clone());
                map.insert(d, n);
            }
            left.relabel(&map);
        }
        left.coeff *= right.coeff;
        left.factors.extend(right.factors);
        left
    }

    pub fn scaled(mut self, c: &Rational) -> Term {
        self.coeff *= c;
        self
    }

    /// Relabels dummies to `%1, %2, ...` in first-occurrence order, skipping
    /// labels that are free in this term.
    pub fn rename_dummies(&self) -> Term {
        let occ = self.occurrences();
        let free: BTreeSet<IndexName> = occ
            .iter()
            .filter(|(_, v)| v.len() == 1)
            .map(|(i, _)| (*i).clone())
            .collect();
        let dummies: BTreeSet<&IndexName> = occ.iter().filter(|(_, v)| v.len() >= 2).map(|(i, _)| *i).collect();
        let mut map = BTreeMap::new();
        let mut next = 1;
        for label in self.labels_in_order() {
            if dummies.contains(&label) {
                let mut n = IndexName::generated(next);
                while free.contains(&n) {
                    next += 1;
                    n = IndexName::generated(next);
                }
                next += 1;
                map.insert(label, n);
            }
        }
        let mut t = self.clone();
        t.relabel(&map);
        t
    }
}

/// A sum of terms; the empty sum is zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Expression {
    pub terms: Vec<Term>,
}

impl Expression {
    pub fn zero() -> Self {
        Expression { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Expression::number(Rational::one())
    }

    pub fn number(c: Rational) -> Self {
        if c.is_zero() {
            Expression::zero()
        } else {
            Expression {
                terms: vec![Term::number(c)],
            }
        }
    }

    pub fn from_terms(terms: Vec<Term>) -> Self {
        Expression {
            terms: terms.into_iter().filter(|t| !t.coeff.is_zero()).collect(),
        }
    }

    pub fn factor(f: impl Into<Factor>) -> Self {
        Expression {
            terms: vec![Term::factor(f)],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Expression) -> Expression {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Expression::from_terms(terms)
    }

    pub fn sub(&self, other: &Expression) -> Expression {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Expression {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, c: &Rational) -> Expression {
        Expression::from_terms(self.terms.iter().cloned().map(|t| t.scaled(c)).collect())
    }

    /// Distributes the product, freshening dummies per copy.
    pub fn mul(&self, other: &Expression) -> Expression {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(a.mul(b));
            }
        }
        Expression::from_terms(terms)
    }

    pub fn pow(&self, n: u32) -> Expression {
        (0..n).fold(Expression::one(), |acc, _| acc.mul(self))
    }

    pub fn map_terms(&self, f: impl FnMut(&Term) -> Expression) -> Expression {
        let mut out = Expression::zero();
        for e in self.terms.iter().map(f) {
            out.terms.extend(e.terms);
        }
        out
    }

    pub fn try_map_terms(&self, mut f: impl FnMut(&Term) -> Result<Expression>) -> Result<Expression> {
        let mut out = Expression::zero();
        for t in &self.terms {
            out.terms.extend(f(t)?.terms);
        }
        Ok(out)
    }

    /// Validates every term and checks that all terms share one free-index set.
    pub fn validate(&self) -> Result<()> {
        for t in &self.terms {
            t.validate()?;
        }
        self.free_indices().map(|_| ())
    }

    pub fn free_indices(&self) -> Result<FreeIndices> {
        let mut it = self.terms.iter();
        let Some(first) = it.next() else {
            return Ok(FreeIndices::new());
        };
        let free = first.free_indices();
        for t in it {
            let other = t.free_indices();
            if other != free {
                return Err(Error::MixedFreeIndices {
                    left: format_free(&free),
                    right: format_free(&other),
                });
            }
        }
        Ok(free)
    }

    pub fn rename_dummies(&self) -> Expression {
        Expression {
            terms: self.terms.iter().map(Term::rename_dummies).collect(),
        }
    }

    /// Every label used anywhere in the expression.
    pub fn labels(&self) -> BTreeSet<IndexName> {
        self.terms.iter().flat_map(|t| t.labels()).collect()
    }

    pub fn relabel(&self, map: &BTreeMap<IndexName, IndexName>) -> Expression {
        let mut e = self.clone();
        for t in &mut e.terms {
            t.relabel(map);
        }
        e
    }

    /// Renames every dummy that appears in `avoid`.
    pub fn freshen_against(&self, avoid: &BTreeSet<IndexName>) -> Expression {
        let mut e = self.clone();
        for t in &mut e.terms {
            t.freshen_against(avoid);
        }
        e
    }

    /// Single-term view, if the expression is exactly one term.
    pub fn as_single_term(&self) -> Option<&Term> {
        match self.terms.as_slice() {
            [t] => Some(t),
            _ => None,
        }
    }

    /// Names of every indexed object, including those inside wrapped products.
    pub fn tensor_names(&self) -> BTreeSet<String> {
        fn walk(f: &Factor, out: &mut BTreeSet<String>) {
            match f {
                Factor::Indexed(t) => {
                    out.insert(t.name.clone());
                }
                Factor::Wrapped(w) => w.body.iter().for_each(|b| walk(b, out)),
            }
        }
        let mut out = BTreeSet::new();
        for t in &self.terms {
            for f in &t.factors {
                walk(f, &mut out);
            }
        }
        out
    }
}

impl From<Term> for Expression {
    fn from(t: Term) -> Self {
        Expression::from_terms(vec![t])
    }
}

impl From<Indexed> for Expression {
    fn from(t: Indexed) -> Self {
        Expression::factor(t)
    }
}

/// `-1/4`-style sign handling shared by the renderers.
pub(crate) fn split_sign(c: &Rational) -> (bool, Rational) {
    (c.is_negative(), c.abs())
}

pub(crate) mod rational_string {
    use super::Rational;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(|_| de::Error::custom(format!("bad rational {s}")))
    }
}
