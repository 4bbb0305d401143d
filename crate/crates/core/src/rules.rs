//! Pattern rewriting (`matchdeclare`, `defrule`, `apply1`) and component
//! definitions (`components`, `remcomps`).
//!
//! A pattern is a sum of one or two terms. Its index labels are either
//! metavariables, which bind to any index of the target (dummies included),
//! or literal labels that must match exactly. Factors match up to their
//! declared symmetries and commuting partial derivatives. A two-term pattern
//! matches a pair of target terms `t1 + t2` when `t1 = s * R * P1(b)` and
//! `t2` is canonically equal to `s * R * P2(b)`; both are then replaced by
//! `s * R * replacement(b)`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::algebra::{canform, canonical_term_keyed, TermKey};
use crate::calculus::{apply_derivs, covdiff_inert, replace_factor};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::{Expression, Factor, IndexName, Indexed, Rational, Term};
use crate::symmetry::{indexed_variants, SymmetryTable};

/// Pass limit for [`apply1`].
pub const MAX_PASSES: usize = 10_000;
/// Nesting limit for component substitution.
const MAX_SUBSTITUTION_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteRule {
    pub name: String,
    pub pattern: Expression,
    pub replacement: Expression,
    pub metavars: BTreeSet<IndexName>,
}

impl RewriteRule {
    /// Builds a rule, checking that the replacement only uses bound
    /// metavariables and has the same free indices as the pattern.
    pub fn new(
        name: impl Into<String>,
        pattern: Expression,
        replacement: Expression,
        metavars: &BTreeSet<IndexName>,
    ) -> Result<Self> {
        let name = name.into();
        if pattern.is_zero() || pattern.terms.len() > 2 {
            return Err(Error::Unsupported(format!(
                "rule {name}: patterns must have one or two terms"
            )));
        }
        let in_pattern = pattern.labels();
        for l in replacement.labels() {
            if metavars.contains(&l) && !in_pattern.contains(&l) {
                return Err(Error::UnboundMetavariable(l.to_string()));
            }
        }
        let pf = pattern.free_indices()?;
        let rf = replacement.free_indices()?;
        if !replacement.is_zero() && pf != rf || replacement.is_zero() && !pf.is_empty() {
            return Err(Error::RuleFreeIndexMismatch(name));
        }
        let metavars = in_pattern.intersection(metavars).cloned().collect();
        Ok(RewriteRule {
            name,
            pattern,
            replacement,
            metavars,
        })
    }
}

/// Declared metavariables and named rules.
#[derive(Debug, Clone, Default)]
pub struct RuleTable {
    metavars: BTreeSet<IndexName>,
    rules: BTreeMap<String, RewriteRule>,
}

impl RuleTable {
    /// `matchdeclare(label, atom)`: `label` matches any single index.
    pub fn matchdeclare(&mut self, label: impl Into<IndexName>, predicate: &str) -> Result<()> {
        match predicate {
            "atom" | "true" => {
                self.metavars.insert(label.into());
                Ok(())
            }
            other => Err(Error::Unsupported(format!("match predicate {other}"))),
        }
    }

    pub fn metavars(&self) -> &BTreeSet<IndexName> {
        &self.metavars
    }

    /// `defrule(name, pattern, replacement)`; redefining a name replaces it.
    pub fn defrule(&mut self, name: &str, pattern: Expression, replacement: Expression) -> Result<&RewriteRule> {
        let rule = RewriteRule::new(name, pattern, replacement, &self.metavars)?;
        self.rules.insert(name.to_string(), rule);
        Ok(&self.rules[name])
    }

    pub fn get(&self, name: &str) -> Result<&RewriteRule> {
        self.rules.get(name).ok_or_else(|| Error::UnknownRule(name.to_string()))
    }
}

type Binding = BTreeMap<IndexName, IndexName>;

fn bind(b: &mut Binding, p: &IndexName, t: &IndexName, metavars: &BTreeSet<IndexName>) -> bool {
    if metavars.contains(p) {
        match b.get(p) {
            Some(x) => x == t,
            None => {
                if b.values().any(|v| v == t) {
                    return false;
                }
                b.insert(p.clone(), t.clone());
                true
            }
        }
    } else {
        p == t
    }
}

fn match_indexed(p: &Indexed, t: &Indexed, b: &Binding, metavars: &BTreeSet<IndexName>) -> Option<Binding> {
    if p.name != t.name
        || p.cov.len() != t.cov.len()
        || p.contra.len() != t.contra.len()
        || p.derivs.len() != t.derivs.len()
        || p.derivs.iter().zip(&t.derivs).any(|(x, y)| x.kind != y.kind)
    {
        return None;
    }
    let mut b = b.clone();
    let pairs = p
        .cov
        .iter()
        .zip(&t.cov)
        .chain(p.contra.iter().zip(&t.contra))
        .chain(p.derivs.iter().map(|d| &d.index).zip(t.derivs.iter().map(|d| &d.index)));
    for (x, y) in pairs {
        if !bind(&mut b, x, y, metavars) {
            return None;
        }
    }
    Some(b)
}

fn match_factor(
    p: &Factor,
    t: &Factor,
    b: &Binding,
    metavars: &BTreeSet<IndexName>,
    table: &SymmetryTable,
) -> Vec<(Binding, i32)> {
    match (p, t) {
        (Factor::Indexed(p), Factor::Indexed(t)) => indexed_variants(t, table)
            .into_iter()
            .filter_map(|(v, s)| match_indexed(p, &v, b, metavars).map(|nb| (nb, s)))
            .collect(),
        (Factor::Wrapped(pw), Factor::Wrapped(tw)) => {
            if pw.derivs.len() != tw.derivs.len()
                || pw.body.len() != tw.body.len()
                || pw.derivs.iter().zip(&tw.derivs).any(|(x, y)| x.kind != y.kind)
            {
                return Vec::new();
            }
            let mut out = Vec::new();
            for (mut nb, s, used) in match_product(&pw.body, &tw.body, b, metavars, table) {
                if used.len() != tw.body.len() {
                    continue;
                }
                if pw
                    .derivs
                    .iter()
                    .zip(&tw.derivs)
                    .all(|(x, y)| bind(&mut nb, &x.index, &y.index, metavars))
                {
                    out.push((nb, s));
                }
            }
            out
        }
        _ => Vec::new(),
    }
}

/// Every way of matching the pattern factors injectively into `target`.
fn match_product(
    pattern: &[Factor],
    target: &[Factor],
    b: &Binding,
    metavars: &BTreeSet<IndexName>,
    table: &SymmetryTable,
) -> Vec<(Binding, i32, Vec<usize>)> {
    let mut states = vec![(b.clone(), 1, Vec::new())];
    for pf in pattern {
        let mut next = Vec::new();
        for (sb, ss, used) in &states {
            for (ti, tf) in target.iter().enumerate() {
                if used.contains(&ti) {
                    continue;
                }
                for (nb, s) in match_factor(pf, tf, sb, metavars, table) {
                    let mut u = used.clone();
                    u.push(ti);
                    next.push((nb, ss * s, u));
                }
            }
        }
        states = next;
    }
    states
}

/// `expr` with metavariables renamed by `b`; other dummies are freshened
/// first so they cannot capture a bound label.
fn instantiate(expr: &Expression, b: &Binding) -> Expression {
    let targets: BTreeSet<IndexName> = b.values().cloned().collect();
    expr.freshen_against(&targets).relabel(b)
}

struct Matched {
    /// Coefficient times the unmatched factors of the target term.
    rest: Term,
    binding: Binding,
}

fn match_term(pattern: &Term, target: &Term, metavars: &BTreeSet<IndexName>, table: &SymmetryTable) -> Vec<Matched> {
    let mut out = Vec::new();
    for (b, sign, used) in match_product(&pattern.factors, &target.factors, &Binding::new(), metavars, table) {
        let mut rest = target.clone();
        let mut used = used;
        used.sort_unstable();
        for i in used.into_iter().rev() {
            rest.factors.remove(i);
        }
        rest.coeff = target.coeff.clone() * Rational::from_integer(sign.into()) / pattern.coeff.clone();
        out.push(Matched { rest, binding: b });
    }
    out
}

fn key_of(t: &Term, table: &SymmetryTable) -> Result<Option<(TermKey, Rational)>> {
    Ok(canonical_term_keyed(t, table)?.map(|(k, ct)| (k, ct.coeff)))
}

/// One left-to-right rewriting pass with a single rule; returns whether
/// anything matched.
fn rewrite_pass(expr: &Expression, rule: &RewriteRule, table: &SymmetryTable) -> Result<(Expression, bool)> {
    let terms = &expr.terms;
    let mut consumed = vec![false; terms.len()];
    let mut keys: Vec<Option<Option<(TermKey, Rational)>>> = vec![None; terms.len()];
    let mut out: Vec<Term> = Vec::new();
    let mut changed = false;
    for i in 0..terms.len() {
        if consumed[i] {
            continue;
        }
        let mut done = false;
        let orders: Vec<(usize, Option<usize>)> = match rule.pattern.terms.len() {
            1 => vec![(0, None)],
            _ => vec![(0, Some(1)), (1, Some(0))],
        };
        'orders: for (p1, p2) in orders {
            for m in match_term(&rule.pattern.terms[p1], &terms[i], &rule.metavars, table) {
                let partner = match p2 {
                    None => None,
                    Some(p2) => {
                        let p2 = &rule.pattern.terms[p2];
                        let bound = p2
                            .labels()
                            .iter()
                            .filter(|l| rule.metavars.contains(*l))
                            .all(|l| m.binding.contains_key(l));
                        if !bound {
                            continue;
                        }
                        let expected =
                            Expression::from(m.rest.clone()).mul(&instantiate(&p2.clone().into(), &m.binding));
                        let Some(expected) = expected.as_single_term() else {
                            continue;
                        };
                        let Some(want) = key_of(expected, table)? else { continue };
                        let mut found = None;
                        for j in 0..terms.len() {
                            if j == i || consumed[j] {
                                continue;
                            }
                            if keys[j].is_none() {
                                keys[j] = Some(key_of(&terms[j], table)?);
                            }
                            if keys[j].as_ref().expect("cached").as_ref() == Some(&want) {
                                found = Some(j);
                                break;
                            }
                        }
                        match found {
                            Some(j) => Some(j),
                            None => continue,
                        }
                    }
                };
                let replaced = Expression::from(m.rest).mul(&instantiate(&rule.replacement, &m.binding));
                out.extend(replaced.terms);
                consumed[i] = true;
                if let Some(j) = partner {
                    consumed[j] = true;
                }
                changed = true;
                done = true;
                break 'orders;
            }
        }
        if !done {
            out.push(terms[i].clone());
        }
    }
    Ok((Expression::from_terms(out), changed))
}

/// Applies the rules repeatedly until a pass leaves the canonical form
/// unchanged; the expression from before that pass is returned.
pub fn apply1(expr: &Expression, rules: &[&RewriteRule], ctx: &Context) -> Result<Expression> {
    let table = &ctx.symmetries;
    let mut current = expr.clone();
    let mut current_canon = canform(&current, table)?;
    for _ in 0..MAX_PASSES {
        let mut next = current.clone();
        let mut any = false;
        for rule in rules {
            let (e, changed) = rewrite_pass(&next, rule, table)?;
            any |= changed;
            next = e;
        }
        if !any {
            return Ok(current);
        }
        let next_canon = canform(&next, table)?;
        if next_canon == current_canon {
            return Ok(current);
        }
        current = next;
        current_canon = next_canon;
    }
    Err(Error::IterationCapExceeded(MAX_PASSES))
}

/// `lambda([x], 'covdiff(x, index))` mapped over the terms of `expr`.
pub fn mapcovdiff(expr: &Expression, index: &IndexName, ctx: &Context) -> Expression {
    covdiff_inert(expr, index, ctx)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentDefinition {
    pub lhs: Indexed,
    pub rhs: Expression,
}

/// Active component definitions, keyed by name and exact signature.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ComponentTable {
    defs: BTreeMap<(String, usize, usize), ComponentDefinition>,
}

impl ComponentTable {
    /// `components(lhs, rhs)`.
    pub fn define(&mut self, lhs: Indexed, rhs: Expression) -> Result<()> {
        let labels: BTreeSet<&IndexName> = lhs.cov.iter().chain(&lhs.contra).collect();
        if !lhs.is_plain() || labels.len() != lhs.rank() {
            return Err(Error::SignatureMismatch(lhs.name.clone()));
        }
        let lhs_free = Term::factor(lhs.clone()).free_indices();
        let rhs_free = rhs.free_indices()?;
        if !rhs.is_zero() && rhs_free != lhs_free {
            return Err(Error::SignatureMismatch(lhs.name.clone()));
        }
        self.defs.insert(
            (lhs.name.clone(), lhs.cov.len(), lhs.contra.len()),
            ComponentDefinition { lhs, rhs },
        );
        Ok(())
    }

    /// `remcomps(name)`: drops every definition for `name`.
    pub fn remove(&mut self, name: &str) {
        self.defs.retain(|(n, _, _), _| n != name);
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    pub fn get(&self, t: &Indexed) -> Option<&ComponentDefinition> {
        self.defs.get(&(t.name.clone(), t.cov.len(), t.contra.len()))
    }

    fn mentions(&self, f: &Factor) -> bool {
        match f {
            Factor::Indexed(t) => self.get(t).is_some(),
            Factor::Wrapped(w) => w.body.iter().any(|b| self.mentions(b)),
        }
    }

    /// The definition instantiated at an occurrence, derivative slots applied.
    fn instantiate(&self, occ: &Indexed, ctx: &Context) -> Option<Expression> {
        let def = self.get(occ)?;
        let targets: BTreeSet<IndexName> = occ
            .cov
            .iter()
            .chain(&occ.contra)
            .cloned()
            .chain(occ.derivs.iter().map(|d| d.index.clone()))
            .collect();
        let map: BTreeMap<IndexName, IndexName> = def
            .lhs
            .cov
            .iter()
            .zip(&occ.cov)
            .chain(def.lhs.contra.iter().zip(&occ.contra))
            .map(|(a, b)| (a.clone(), b.clone()))
            .collect();
        let rhs = def.rhs.freshen_against(&targets).relabel(&map);
        Some(apply_derivs(&rhs, &occ.derivs, ctx))
    }
}

/// Substitutes every active component definition until none applies.
pub fn substitute_components(expr: &Expression, ctx: &Context) -> Result<Expression> {
    let comps = &ctx.components;
    if comps.is_empty() {
        return Ok(expr.clone());
    }
    let mut out = Vec::new();
    let mut work: Vec<(Term, usize)> = expr.terms.iter().rev().map(|t| (t.clone(), 0)).collect();
    while let Some((t, depth)) = work.pop() {
        let Some(i) = t.factors.iter().position(|f| comps.mentions(f)) else {
            out.push(t);
            continue;
        };
        if depth >= MAX_SUBSTITUTION_DEPTH {
            return Err(Error::Unsupported("component definitions do not terminate".into()));
        }
        let replacement = match &t.factors[i] {
            Factor::Indexed(x) => comps.instantiate(x, ctx).expect("mentioned"),
            Factor::Wrapped(w) => {
                let body = Expression::from(Term::new(Rational::from_integer(1.into()), w.body.clone()));
                apply_derivs(&substitute_components(&body, ctx)?, &w.derivs, ctx)
            }
        };
        for nt in replace_factor(&t, i, &replacement).terms.into_iter().rev() {
            if !nt.coeff.is_zero() {
                work.push((nt, depth + 1));
            }
        }
    }
    Ok(Expression::from_terms(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::extdiff;
    use crate::expr::integer;

    fn a(i: &str, d: &str) -> Expression {
        Expression::factor(Indexed::new("A", [i], Vec::<&str>::new()).with_derivs([d]))
    }

    fn f(i: &str, j: &str) -> Expression {
        Expression::factor(Indexed::new("F", [i, j], Vec::<&str>::new()))
    }

    fn maxwell(ctx: &Context) -> RuleTable {
        let mut rules = RuleTable::default();
        rules.matchdeclare("a", "atom").unwrap();
        rules.matchdeclare("b", "atom").unwrap();
        let pat = extdiff(
            &Expression::factor(Indexed::new("A", ["a"], Vec::<&str>::new())),
            &"b".into(),
            ctx,
        )
        .unwrap();
        rules.defrule("Maxwell", pat, f("a", "b")).unwrap();
        rules
    }

    #[test]
    fn two_term_pattern_folds_a_pair() {
        let ctx = Context::new();
        let rules = maxwell(&ctx);
        let e = a("q", "p").sub(&a("p", "q")).scale(&integer(3));
        let r = apply1(&e, &[rules.get("Maxwell").unwrap()], &ctx).unwrap();
        assert_eq!(r, f("p", "q").scale(&integer(3)));
    }

    #[test]
    fn lone_term_is_left_alone() {
        let ctx = Context::new();
        let rules = maxwell(&ctx);
        let e = a("q", "p");
        assert_eq!(apply1(&e, &[rules.get("Maxwell").unwrap()], &ctx).unwrap(), e);
    }

    #[test]
    fn unbound_metavariable() {
        let mut rules = RuleTable::default();
        rules.matchdeclare("a", "atom").unwrap();
        rules.matchdeclare("c", "atom").unwrap();
        let pat = Expression::factor(Indexed::new("X", ["a"], Vec::<&str>::new()));
        let rep = Expression::factor(Indexed::new("Y", ["c"], Vec::<&str>::new()));
        assert_eq!(
            rules.defrule("r", pat, rep).unwrap_err(),
            Error::UnboundMetavariable("c".into())
        );
    }

    #[test]
    fn free_index_mismatch() {
        let mut rules = RuleTable::default();
        rules.matchdeclare("a", "atom").unwrap();
        let pat = Expression::factor(Indexed::new("X", ["a"], Vec::<&str>::new()));
        let rep = Expression::factor(Indexed::scalar("Y"));
        assert!(matches!(
            rules.defrule("r", pat, rep),
            Err(Error::RuleFreeIndexMismatch(_))
        ));
    }

    #[test]
    fn runaway_rule_hits_the_cap() {
        let ctx = Context::new();
        let mut rules = RuleTable::default();
        let x = Expression::factor(Indexed::scalar("x"));
        rules.defrule("double", x.clone(), x.scale(&integer(2))).unwrap();
        assert_eq!(
            apply1(&x, &[rules.get("double").unwrap()], &ctx),
            Err(Error::IterationCapExceeded(MAX_PASSES))
        );
    }

    #[test]
    fn components_substitute_with_derivatives() {
        let mut ctx = Context::new();
        let omega = Expression::factor(Indexed::new("A", ["m"], Vec::<&str>::new()));
        let rhs = extdiff(&omega, &"n".into(), &ctx).unwrap();
        ctx.components
            .define(Indexed::new("F", ["m", "n"], Vec::<&str>::new()), rhs)
            .unwrap();
        let fd = Expression::factor(Indexed::new("F", ["p", "q"], Vec::<&str>::new()).with_derivs(["r"]));
        let s = substitute_components(&fd, &ctx).unwrap();
        let expected = Expression::factor(Indexed::new("A", ["q"], Vec::<&str>::new()).with_derivs(["p", "r"])).sub(
            &Expression::factor(Indexed::new("A", ["p"], Vec::<&str>::new()).with_derivs(["q", "r"])),
        );
        assert_eq!(s, expected);
        ctx.components.remove("F");
        assert_eq!(substitute_components(&fd, &ctx).unwrap(), fd);
    }

    #[test]
    fn component_signature_is_checked() {
        let mut table = ComponentTable::default();
        let bad = table.define(
            Indexed::new("F", ["m", "n"], Vec::<&str>::new()),
            Expression::factor(Indexed::new("A", ["m"], Vec::<&str>::new())),
        );
        assert!(matches!(bad, Err(Error::SignatureMismatch(_))));
    }
}
