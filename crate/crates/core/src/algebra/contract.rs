//! Metric and Kronecker-delta contraction.
//!
//! The metric raises covariant slots and lowers contravariant ones when one
//! of its indices is summed against a slot of another factor. Raised slots
//! are appended to the contravariant list and lowered slots prepended to the
//! covariant list, so the upper-first reading `X^{u..}_{c..}` is preserved.
//! Only covariant/contravariant slots are raised or lowered; derivative slots
//! and wrapped products are left alone. The delta substitutes through any
//! slot.

use std::collections::BTreeMap;

use crate::context::{Context, Dimension};
use crate::expr::{Expression, Factor, IndexName, Indexed, Rational, Term, DIM, ICHR2, KDELTA};
use crate::symmetry::indexed_variants;

/// Contracts metrics and deltas against the other factors of every term.
/// A metric-absorbing variant: the object, its sign, and the slots renamed.
type Candidate = (Indexed, i32, Vec<(usize, IndexName)>);

pub fn contract(expr: &Expression, ctx: &Context) -> Expression {
    Expression::from_terms(expr.terms.iter().filter_map(|t| contract_term(t, ctx)).collect())
}

/// Contracts one term; `None` when the term vanishes (a differentiated delta).
pub fn contract_term(term: &Term, ctx: &Context) -> Option<Term> {
    let mut t = term.clone();
    loop {
        if t.factors
            .iter()
            .any(|f| matches!(f, Factor::Indexed(x) if x.name == KDELTA && !x.derivs.is_empty()))
        {
            return None;
        }
        if delta_step(&mut t, ctx) || mixed_metric_step(&mut t, ctx) || metric_step(&mut t, ctx) {
            continue;
        }
        return Some(t);
    }
}

fn is_delta(f: &Factor) -> Option<(&IndexName, &IndexName)> {
    match f {
        Factor::Indexed(x) if x.name == KDELTA && x.cov.len() == 1 && x.contra.len() == 1 => {
            Some((&x.cov[0], &x.contra[0]))
        }
        _ => None,
    }
}

/// Occurs somewhere in the term outside factor `skip`.
fn occurs_elsewhere(t: &Term, skip: usize, label: &IndexName) -> bool {
    t.factors
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != skip)
        .any(|(_, f)| f.labels().contains(&label))
}

fn delta_step(t: &mut Term, ctx: &Context) -> bool {
    for i in 0..t.factors.len() {
        let Some((lo, up)) = is_delta(&t.factors[i]) else {
            continue;
        };
        let (lo, up) = (lo.clone(), up.clone());
        if lo == up {
            t.factors.remove(i);
            match ctx.metric.dimension {
                Dimension::Fixed(n) => t.coeff *= Rational::from_integer(n.into()),
                Dimension::Symbolic => t.factors.push(Indexed::scalar(DIM).into()),
            }
            return true;
        }
        let (from, to) = if occurs_elsewhere(t, i, &lo) {
            (lo, up)
        } else if occurs_elsewhere(t, i, &up) {
            (up, lo)
        } else {
            continue;
        };
        t.factors.remove(i);
        t.relabel(&BTreeMap::from([(from, to)]));
        return true;
    }
    false
}

fn mixed_metric_step(t: &mut Term, ctx: &Context) -> bool {
    for f in &mut t.factors {
        if let Factor::Indexed(x) = f {
            if ctx.is_metric(x) && x.is_plain() && x.cov.len() == 1 && x.contra.len() == 1 {
                x.name = KDELTA.to_string();
                return true;
            }
        }
    }
    false
}

/// A plain metric factor with both indices in one variance class.
fn metric_pair(f: &Factor, ctx: &Context, upper: bool) -> Option<[IndexName; 2]> {
    let x = f.as_indexed()?;
    if !ctx.is_metric(x) || !x.is_plain() {
        return None;
    }
    let slots = if upper { &x.contra } else { &x.cov };
    let other = if upper { &x.cov } else { &x.contra };
    (slots.len() == 2 && other.is_empty()).then(|| [slots[0].clone(), slots[1].clone()])
}

/// For each slot in `labels` (in the given order), the metric that contracts
/// it and the label it turns into. Stops at the first slot with no partner.
fn partner_run(
    t: &Term,
    target: usize,
    labels: &[IndexName],
    ctx: &Context,
    upper_metric: bool,
) -> Vec<(usize, IndexName)> {
    let mut used = Vec::new();
    let mut out = Vec::new();
    for l in labels {
        let found = t.factors.iter().enumerate().find_map(|(j, f)| {
            if j == target || used.contains(&j) {
                return None;
            }
            let [p, q] = metric_pair(f, ctx, upper_metric)?;
            if *l == p {
                Some((j, q))
            } else if *l == q {
                Some((j, p))
            } else {
                None
            }
        });
        match found {
            Some((j, other)) => {
                used.push(j);
                out.push((j, other));
            }
            None => break,
        }
    }
    out
}

fn metric_step(t: &mut Term, ctx: &Context) -> bool {
    if ctx.metric.name.is_none() {
        return false;
    }
    for i in 0..t.factors.len() {
        let Factor::Indexed(x) = &t.factors[i] else {
            continue;
        };
        // A differentiated metric is the derivative of the metric itself,
        // not a metric-raised derivative; leave it alone.
        if x.name == KDELTA || x.name == ICHR2 || ctx.is_metric(x) && !x.is_plain() {
            continue;
        }
        let variants = indexed_variants(
            &Indexed {
                derivs: vec![],
                ..x.clone()
            },
            &ctx.symmetries,
        );
        // Raise a prefix of covariant slots.
        let mut best: Option<Candidate> = None;
        for (v, s) in &variants {
            let run = partner_run(t, i, &v.cov, ctx, true);
            if !run.is_empty() && best.as_ref().is_none_or(|b| run.len() > b.2.len()) {
                best = Some((v.clone(), *s, run));
            }
        }
        if let Some((v, s, run)) = best {
            let mut nx = Indexed {
                derivs: x.derivs.clone(),
                ..v
            };
            let r = run.len();
            let raised: Vec<IndexName> = run.iter().map(|(_, o)| o.clone()).collect();
            nx.cov.drain(..r);
            nx.contra.extend(raised);
            apply(t, i, nx, s, run.into_iter().map(|(j, _)| j).collect());
            return true;
        }
        // Lower a suffix of contravariant slots.
        let mut best: Option<Candidate> = None;
        for (v, s) in &variants {
            let rev: Vec<IndexName> = v.contra.iter().rev().cloned().collect();
            let run = partner_run(t, i, &rev, ctx, false);
            if !run.is_empty() && best.as_ref().is_none_or(|b| run.len() > b.2.len()) {
                best = Some((v.clone(), *s, run));
            }
        }
        if let Some((v, s, run)) = best {
            let mut nx = Indexed {
                derivs: x.derivs.clone(),
                ..v
            };
            let r = run.len();
            let keep = nx.contra.len() - r;
            nx.contra.truncate(keep);
            let mut lowered: Vec<IndexName> = run.iter().rev().map(|(_, o)| o.clone()).collect();
            lowered.append(&mut nx.cov);
            nx.cov = lowered;
            apply(t, i, nx, s, run.into_iter().map(|(j, _)| j).collect());
            return true;
        }
    }
    false
}

fn apply(t: &mut Term, i: usize, nx: Indexed, sign: i32, mut remove: Vec<usize>) {
    t.factors[i] = Factor::Indexed(nx);
    if sign < 0 {
        t.coeff = -t.coeff.clone();
    }
    remove.sort_unstable();
    for j in remove.into_iter().rev() {
        t.factors.remove(j);
    }
}
