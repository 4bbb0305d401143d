//! Canonical form under dummy relabeling, factor reordering, declared index
//! symmetries and commuting partial derivatives.
//!
//! Each term is brought to the lexicographically least arrangement over the
//! whole group by enumeration. Terms in this domain carry a handful of
//! indices, so the candidate set stays small; anything past
//! [`MAX_CANDIDATES`] is refused rather than searched.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::expr::{DerivKind, Expression, Factor, IndexName, Rational, Term, Wrapped};
use crate::symmetry::{indexed_variants, ordinary_runs, variant_count, SymmetryTable};

/// 10!
pub const MAX_CANDIDATES: u128 = 3_628_800;

/// Label token used when comparing arrangements. Dummies sort before free
/// labels, so first-occurrence renaming gives the least relabeling.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Tok {
    Dummy(usize),
    Free(IndexName),
}

/// Label-independent description of a factor, used to order factors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Shape {
    Indexed {
        name: String,
        cov: usize,
        contra: usize,
        derivs: Vec<DerivKind>,
    },
    Wrapped {
        body: Vec<Shape>,
        derivs: Vec<DerivKind>,
    },
}

pub(crate) fn shape(f: &Factor) -> Shape {
    match f {
        Factor::Indexed(t) => Shape::Indexed {
            name: t.name.clone(),
            cov: t.cov.len(),
            contra: t.contra.len(),
            derivs: t.derivs.iter().map(|d| d.kind).collect(),
        },
        Factor::Wrapped(w) => {
            let mut body: Vec<Shape> = w.body.iter().map(shape).collect();
            body.sort();
            Shape::Wrapped {
                body,
                derivs: w.derivs.iter().map(|d| d.kind).collect(),
            }
        }
    }
}

/// Key identifying a canonical term up to its coefficient.
pub(crate) type TermKey = (Vec<Shape>, Vec<Tok>);

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

fn sorted_groups(factors: &[Factor]) -> (Vec<&Factor>, Vec<std::ops::Range<usize>>) {
    let mut items: Vec<(Shape, &Factor)> = factors.iter().map(|f| (shape(f), f)).collect();
    items.sort_by(|a, b| a.0.cmp(&b.0));
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=items.len() {
        if i == items.len() || items[i].0 != items[start].0 {
            groups.push(start..i);
            start = i;
        }
    }
    (items.into_iter().map(|(_, f)| f).collect(), groups)
}

fn count_factor(f: &Factor, table: &SymmetryTable) -> u128 {
    match f {
        Factor::Indexed(t) => variant_count(t, table),
        Factor::Wrapped(w) => {
            let mut n = count_list(&w.body, table);
            for r in ordinary_runs(w.derivs.iter().map(|d| d.kind)) {
                n = n.saturating_mul(factorial(r.len()));
            }
            n
        }
    }
}

fn count_list(factors: &[Factor], table: &SymmetryTable) -> u128 {
    let (sorted, groups) = sorted_groups(factors);
    let mut n: u128 = groups.iter().map(|g| factorial(g.len())).product();
    for f in sorted {
        n = n.saturating_mul(count_factor(f, table));
    }
    n
}

/// Number of arrangements the canonicalizer would enumerate for `term`.
pub fn candidate_count(term: &Term, table: &SymmetryTable) -> u128 {
    count_list(&term.factors, table)
}

fn factor_variants(f: &Factor, table: &SymmetryTable) -> Vec<(Factor, i32)> {
    match f {
        Factor::Indexed(t) => indexed_variants(t, table)
            .into_iter()
            .map(|(v, s)| (Factor::Indexed(v), s))
            .collect(),
        Factor::Wrapped(w) => {
            let mut out = Vec::new();
            for (body, s) in arrangements(&w.body, table) {
                let base = Wrapped {
                    body,
                    derivs: w.derivs.clone(),
                };
                for derivs in deriv_orders(&base.derivs) {
                    out.push((
                        Factor::Wrapped(Wrapped {
                            body: base.body.clone(),
                            derivs,
                        }),
                        s,
                    ));
                }
            }
            out
        }
    }
}

fn deriv_orders(derivs: &[crate::expr::DerivSlot]) -> Vec<Vec<crate::expr::DerivSlot>> {
    let mut out = vec![derivs.to_vec()];
    for run in ordinary_runs(derivs.iter().map(|d| d.kind)) {
        if run.len() < 2 {
            continue;
        }
        let mut next = Vec::new();
        for base in &out {
            for perm in run.clone().permutations(run.len()) {
                let mut v = base.clone();
                for (dst, &src) in run.clone().zip(&perm) {
                    v[dst] = base[src].clone();
                }
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// All arrangements of a factor list: factors sorted by shape, every
/// ordering within groups of equal shape, every symmetry variant.
/// Sort key, factor order, dummy order and sign of one candidate.
type Arrangement = (Vec<Tok>, Vec<Factor>, Vec<IndexName>, i32);

fn arrangements(factors: &[Factor], table: &SymmetryTable) -> Vec<(Vec<Factor>, i32)> {
    let (sorted, groups) = sorted_groups(factors);
    let variants: Vec<Vec<(Factor, i32)>> = sorted.iter().map(|f| factor_variants(f, table)).collect();
    let mut out: Vec<(Vec<Factor>, i32)> = vec![(Vec::new(), 1)];
    for g in groups {
        let mut next = Vec::new();
        for (prefix, sign) in &out {
            for order in g.clone().permutations(g.len()) {
                let mut partial = vec![(prefix.clone(), *sign)];
                for member in order {
                    let mut grown = Vec::with_capacity(partial.len() * variants[member].len());
                    for (p, s) in &partial {
                        for (v, vs) in &variants[member] {
                            let mut q = p.clone();
                            q.push(v.clone());
                            grown.push((q, s * vs));
                        }
                    }
                    partial = grown;
                }
                next.extend(partial);
            }
        }
        out = next;
    }
    out
}

fn encode(factors: &[Factor], dummies: &BTreeSet<IndexName>) -> (Vec<Tok>, Vec<IndexName>) {
    let mut order: Vec<IndexName> = Vec::new();
    let mut toks = Vec::new();
    for f in factors {
        f.for_each_slot(&mut |i, _| {
            if dummies.contains(i) {
                let k = match order.iter().position(|o| o == i) {
                    Some(k) => k,
                    None => {
                        order.push(i.clone());
                        order.len() - 1
                    }
                };
                toks.push(Tok::Dummy(k));
            } else {
                toks.push(Tok::Free(i.clone()));
            }
        });
    }
    (toks, order)
}

/// Canonical representative of one term, with its key; `None` when the term
/// vanishes by symmetry.
pub(crate) fn canonical_term_keyed(term: &Term, table: &SymmetryTable) -> Result<Option<(TermKey, Term)>> {
    if term.coeff.is_zero() {
        return Ok(None);
    }
    let n = candidate_count(term, table);
    if n > MAX_CANDIDATES {
        return Err(Error::TooManyCandidates(n));
    }
    let dummies = term.dummies();
    let mut best: Option<Arrangement> = None;
    let mut conflicting = false;
    for (arr, sign) in arrangements(&term.factors, table) {
        let (toks, order) = encode(&arr, &dummies);
        match &best {
            Some((b, _, _, bs)) if toks == *b => {
                if *bs != sign {
                    conflicting = true;
                }
            }
            Some((b, ..)) if toks > *b => {}
            _ => {
                best = Some((toks, arr, order, sign));
                conflicting = false;
            }
        }
    }
    let (toks, arr, order, sign) = best.expect("at least the identity arrangement");
    if conflicting {
        return Ok(None);
    }
    let free: BTreeSet<IndexName> = term.free_indices().into_iter().map(|(i, _)| i).collect();
    let mut map = BTreeMap::new();
    let mut k = 1;
    for d in order {
        let mut label = IndexName::generated(k);
        while free.contains(&label) {
            k += 1;
            label = IndexName::generated(k);
        }
        k += 1;
        map.insert(d, label);
    }
    let mut out = Term::new(term.coeff.clone() * Rational::from_integer(sign.into()), arr);
    out.relabel(&map);
    let shapes = out.factors.iter().map(shape).collect();
    Ok(Some(((shapes, toks), out)))
}

/// Canonical representative of a single term (coefficient included).
pub fn canonical_term(term: &Term, table: &SymmetryTable) -> Result<Option<Term>> {
    Ok(canonical_term_keyed(term, table)?.map(|(_, t)| t))
}

/// Canonical form of an expression: every term canonicalized, alpha- and
/// symmetry-equivalent terms collected, zero terms dropped, terms sorted.
pub fn canform(expr: &Expression, table: &SymmetryTable) -> Result<Expression> {
    let mut collected: BTreeMap<TermKey, Term> = BTreeMap::new();
    for t in &expr.terms {
        if let Some((key, ct)) = canonical_term_keyed(t, table)? {
            match collected.get_mut(&key) {
                Some(acc) => acc.coeff += ct.coeff,
                None => {
                    collected.insert(key, ct);
                }
            }
        }
    }
    Ok(Expression::from_terms(collected.into_values().collect()))
}
