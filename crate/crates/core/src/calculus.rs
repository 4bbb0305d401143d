//! Differential operators: partial and covariant derivatives, the
//! Christoffel symbol, exterior derivative of covariant forms, and the
//! functional derivative with respect to a field or its derivatives.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use num_traits::One;

use crate::algebra::canform;
use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::{
    fresh_label, rational, DerivKind, DerivSlot, Expression, Factor, IndexName, Indexed, Rational, Term, Variance,
    Wrapped, DIM, ICHR2, KDELTA,
};

/// Whether a factor is constant under differentiation.
fn is_constant(f: &Factor) -> bool {
    matches!(f, Factor::Indexed(t) if (t.name == KDELTA || t.name == DIM) && t.derivs.is_empty())
}

fn avoiding(term: &Term, index: &IndexName) -> Term {
    let mut t = term.clone();
    t.freshen_against(&BTreeSet::from([index.clone()]));
    t
}

/// Partial derivative `idiff(e, index)`, by the Leibniz rule.
pub fn idiff(expr: &Expression, index: &IndexName, _ctx: &Context) -> Expression {
    expr.map_terms(|term| {
        let t = avoiding(term, index);
        let mut out = Vec::new();
        for (i, f) in t.factors.iter().enumerate() {
            if is_constant(f) {
                continue;
            }
            let mut d = t.clone();
            d.factors[i].derivs_mut().push(DerivSlot::ordinary(index.clone()));
            out.push(d);
        }
        Expression::from_terms(out)
    })
}

/// Inert covariant derivative `'covdiff(e, index)`: a derivative slot is
/// appended to a lone non-constant factor, or the non-constant part of the
/// term is wrapped. Deltas and `dim` are pulled out as constants.
pub fn covdiff_inert(expr: &Expression, index: &IndexName, _ctx: &Context) -> Expression {
    expr.map_terms(|term| {
        let t = avoiding(term, index);
        let (constant, mut varying): (Vec<Factor>, Vec<Factor>) = t.factors.into_iter().partition(is_constant);
        let slot = DerivSlot::covariant(index.clone());
        let inner = match varying.len() {
            0 => return Expression::zero(),
            1 => {
                let mut f = varying.pop().expect("one factor");
                f.derivs_mut().push(slot);
                f
            }
            _ => Factor::Wrapped(Wrapped {
                body: varying,
                derivs: vec![slot],
            }),
        };
        let mut factors = constant;
        factors.push(inner);
        Term::new(t.coeff, factors).into()
    })
}

/// Covariant derivative written out with Christoffel symbols:
/// partial derivative, `+ ichr2([i,d],[a])` for every upper slot `a` and
/// `- ichr2([i,b],[d])` for every lower or derivative slot `b`.
pub fn covdiff(expr: &Expression, index: &IndexName, ctx: &Context) -> Result<Expression> {
    let mut out = idiff(expr, index, ctx);
    for term in &expr.terms {
        let t = avoiding(term, index);
        let mut used = t.labels();
        used.insert(index.clone());
        let d = fresh_label(&used);
        for (fi, f) in t.factors.iter().enumerate() {
            let x = match f {
                Factor::Wrapped(_) => {
                    return Err(Error::Unsupported(
                        "expanded covariant derivative of a wrapped product".into(),
                    ))
                }
                Factor::Indexed(x) => x,
            };
            if is_constant(f) {
                continue;
            }
            let n_slots = x.cov.len() + x.contra.len() + x.derivs.len();
            for s in 0..n_slots {
                let mut nx = x.clone();
                let (label, variance) = {
                    let (c, u) = (x.cov.len(), x.contra.len());
                    if s < c {
                        (std::mem::replace(&mut nx.cov[s], d.clone()), Variance::Lower)
                    } else if s < c + u {
                        (std::mem::replace(&mut nx.contra[s - c], d.clone()), Variance::Upper)
                    } else {
                        let slot = &mut nx.derivs[s - c - u];
                        (std::mem::replace(&mut slot.index, d.clone()), Variance::Lower)
                    }
                };
                let (gamma, sign) = match variance {
                    Variance::Upper => (Indexed::new(ICHR2, [index.clone(), d.clone()], [label]), 1),
                    Variance::Lower => (Indexed::new(ICHR2, [index.clone(), label], [d.clone()]), -1),
                };
                let mut nt = t.clone();
                nt.factors[fi] = Factor::Indexed(nx);
                nt.factors.push(gamma.into());
                nt.coeff *= Rational::from_integer(sign.into());
                out.terms.push(nt);
            }
        }
    }
    Ok(Expression::from_terms(out.terms))
}

/// `ichr2([i,j],[k]) = 1/2 g^{ks} (g_{is,j} + g_{js,i} - g_{ij,s})`.
pub fn christoffel(i: &IndexName, j: &IndexName, k: &IndexName, ctx: &Context) -> Result<Expression> {
    let g = ctx.metric_name()?;
    let s = fresh_label(&BTreeSet::from([i.clone(), j.clone(), k.clone()]));
    let lower = |a: &IndexName, b: &IndexName, d: &IndexName| {
        Expression::factor(Indexed::new(g, [a.clone(), b.clone()], Vec::<IndexName>::new()).with_derivs([d.clone()]))
    };
    let bracket = lower(i, &s, j).add(&lower(j, &s, i)).sub(&lower(i, j, &s));
    let inv = Expression::factor(Indexed::new(g, Vec::<IndexName>::new(), [k.clone(), s.clone()]));
    Ok(inv.mul(&bracket).scale(&rational(1, 2)))
}

/// Applies a factor's derivative slots, in order, to an expression that
/// replaces it.
pub fn apply_derivs(expr: &Expression, derivs: &[DerivSlot], ctx: &Context) -> Expression {
    derivs.iter().fold(expr.clone(), |acc, d| match d.kind {
        DerivKind::Ordinary => idiff(&acc, &d.index, ctx),
        DerivKind::Covariant => covdiff_inert(&acc, &d.index, ctx),
    })
}

/// Replaces factor `i` of `term` by `replacement`, freshening dummies.
pub(crate) fn replace_factor(term: &Term, i: usize, replacement: &Expression) -> Expression {
    let mut rest = term.clone();
    rest.factors.remove(i);
    Expression::from(rest).mul(replacement)
}

/// `ev(e, ichr2)`: writes every Christoffel symbol in terms of the metric.
pub fn ev_ichr2(expr: &Expression, ctx: &Context) -> Result<Expression> {
    let mut out = Vec::new();
    let mut work: Vec<Term> = expr.terms.clone();
    while let Some(t) = work.pop() {
        let pos = t.factors.iter().position(
            |f| matches!(f, Factor::Indexed(x) if x.name == ICHR2 && x.cov.len() == 2 && x.contra.len() == 1),
        );
        match pos {
            None => out.push(t),
            Some(i) => {
                let x = t.factors[i].as_indexed().expect("indexed");
                let c = christoffel(&x.cov[0], &x.cov[1], &x.contra[0], ctx)?;
                let c = apply_derivs(&c, &x.derivs, ctx);
                work.extend(replace_factor(&t, i, &c).terms);
            }
        }
    }
    out.reverse();
    Ok(Expression::from_terms(out))
}

/// Free lower indices of a covariant form, in first-occurrence order of its
/// first term.
pub fn form_indices(omega: &Expression) -> Result<Vec<IndexName>> {
    let free = omega.free_indices()?;
    if let Some((i, _)) = free.iter().find(|(_, v)| *v == Variance::Upper) {
        return Err(Error::NotAntisymmetric(format!("free upper index {i}")));
    }
    let Some(first) = omega.terms.first() else {
        return Ok(Vec::new());
    };
    Ok(first
        .labels_in_order()
        .into_iter()
        .filter(|l| free.contains(&(l.clone(), Variance::Lower)))
        .collect())
}

/// Fails unless swapping each adjacent pair of form indices negates `omega`.
pub fn check_antisymmetric(omega: &Expression, ctx: &Context) -> Result<()> {
    let xs = form_indices(omega)?;
    for w in xs.windows(2) {
        let swap = BTreeMap::from([(w[0].clone(), w[1].clone()), (w[1].clone(), w[0].clone())]);
        let sum = omega.add(&omega.relabel(&swap));
        if !canform(&sum, &ctx.symmetries)?.is_zero() {
            return Err(Error::NotAntisymmetric(format!("in {} and {}", w[0], w[1])));
        }
    }
    Ok(())
}

/// Exterior derivative of a covariant p-form with new index `k`:
/// `sum_j (-1)^(j-1) d_{x_j} omega(x_1..^x_j..x_{p+1})`, scaled by
/// `1/(p+1)` when `ctx.geowedge` is off. Fails with `NotAntisymmetric`
/// unless `omega` is antisymmetric in its free indices.
pub fn extdiff(omega: &Expression, k: &IndexName, ctx: &Context) -> Result<Expression> {
    check_antisymmetric(omega, ctx)?;
    let xs = form_indices(omega)?;
    if xs.contains(k) {
        return Err(Error::PatternIndexCollision(k.to_string()));
    }
    let mut all = xs.clone();
    all.push(k.clone());
    let mut avoid: BTreeSet<IndexName> = all.iter().cloned().collect();
    avoid.insert(k.clone());
    let omega = omega.freshen_against(&avoid);
    let mut out = Expression::zero();
    for j in 0..all.len() {
        let rest: Vec<IndexName> = all
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, x)| x.clone())
            .collect();
        let map: BTreeMap<IndexName, IndexName> = xs.iter().cloned().zip(rest).collect();
        let term = idiff(&omega.relabel(&map), &all[j], ctx);
        out = if j % 2 == 0 { out.add(&term) } else { out.sub(&term) };
    }
    if !ctx.geowedge {
        out = out.scale(&Rational::new(1.into(), (all.len() as i64).into()));
    }
    Ok(out)
}

/// Slots of an indexed object in upper-first order with their variance.
fn ordered_slots(t: &Indexed) -> Vec<(IndexName, Variance)> {
    t.contra
        .iter()
        .map(|i| (i.clone(), Variance::Upper))
        .chain(t.cov.iter().map(|i| (i.clone(), Variance::Lower)))
        .collect()
}

/// Functional derivative of `expr` with respect to the field `target`
/// (which may carry ordinary derivative slots). Each matching occurrence
/// contributes deltas and metrics tying its slots to the target's labels;
/// the target's labels come out with the opposite variance.
pub fn fdiff(expr: &Expression, target: &Indexed, ctx: &Context) -> Result<Expression> {
    if target.has_covariant_derivs() {
        return Err(Error::Unsupported(
            "functional derivative by a covariant derivative".into(),
        ));
    }
    let tslots = ordered_slots(target);
    let tderivs: Vec<IndexName> = target.derivs.iter().map(|d| d.index.clone()).collect();
    let tlabels: BTreeSet<IndexName> = tslots
        .iter()
        .map(|(i, _)| i.clone())
        .chain(tderivs.iter().cloned())
        .collect();
    let free = expr.free_indices()?;
    if let Some((i, _)) = free.iter().find(|(i, _)| tlabels.contains(i)) {
        return Err(Error::PatternIndexCollision(i.to_string()));
    }
    let expr = expr.freshen_against(&tlabels);
    let delta = |lower: &IndexName, upper: &IndexName| -> Factor {
        Indexed::new(KDELTA, [lower.clone()], [upper.clone()]).into()
    };
    let mut out = Vec::new();
    for term in &expr.terms {
        for (fi, f) in term.factors.iter().enumerate() {
            let Factor::Indexed(x) = f else { continue };
            if x.name != target.name
                || x.rank() != target.rank()
                || x.derivs.len() != tderivs.len()
                || x.has_covariant_derivs()
            {
                continue;
            }
            let mut base = term.clone();
            base.factors.remove(fi);
            for ((m, vt), (l, vo)) in tslots.iter().zip(ordered_slots(x)) {
                let fct: Factor = match (vt, vo) {
                    (Variance::Lower, Variance::Lower) => delta(&l, m),
                    (Variance::Upper, Variance::Upper) => delta(m, &l),
                    (Variance::Lower, Variance::Upper) => {
                        Indexed::new(ctx.metric_name()?, Vec::<IndexName>::new(), [l, m.clone()]).into()
                    }
                    (Variance::Upper, Variance::Lower) => {
                        Indexed::new(ctx.metric_name()?, [l, m.clone()], Vec::<IndexName>::new()).into()
                    }
                };
                base.factors.push(fct);
            }
            let d = tderivs.len();
            if d == 0 {
                out.push(base);
                continue;
            }
            let weight = Rational::one() / Rational::from_integer((1..=d as i64).product::<i64>().into());
            let occ: Vec<IndexName> = x.derivs.iter().map(|s| s.index.clone()).collect();
            for perm in (0..d).permutations(d) {
                let mut t = base.clone();
                t.coeff *= &weight;
                for (k, &p) in occ.iter().zip(&perm) {
                    t.factors.push(delta(k, &tderivs[p]));
                }
                out.push(t);
            }
        }
    }
    Ok(Expression::from_terms(out))
}
