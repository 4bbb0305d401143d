//! Shared helpers for the integration tests: a seeded generator of valid
//! random expressions and numeric comparison utilities.
#![allow(dead_code)]

use std::collections::BTreeMap;

use indicial::algebra::decsym;
use indicial::context::Context;
use indicial::expr::{rational, Expression, IndexName, Indexed, Term, Variance};
use indicial::numeval::{ComponentAssignment, ComponentOverride, Evaluator};
use indicial::symmetry::{Block, BlockKind};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0x1d1c_1a15;

/// Base seed, overridable with `INDICIAL_SEED`.
pub fn base_seed() -> u64 {
    std::env::var("INDICIAL_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

/// A generator for one named test, derived from the base seed.
pub fn rng(stream: &str) -> ChaCha8Rng {
    let salt = stream.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3)
    });
    ChaCha8Rng::seed_from_u64(base_seed() ^ salt)
}

/// Metric `g`, antisymmetric `F_{ab}`, symmetric `S_{ab}`, and `T_{abc}`
/// antisymmetric in its first two slots.
pub fn corpus_context() -> Context {
    let mut ctx = Context::with_metric("g");
    decsym(&mut ctx, "F", 2, 0, vec![Block::all(BlockKind::Anti, 2)], vec![]).unwrap();
    decsym(&mut ctx, "S", 2, 0, vec![Block::all(BlockKind::Sym, 2)], vec![]).unwrap();
    decsym(
        &mut ctx,
        "T",
        3,
        0,
        vec![Block {
            kind: BlockKind::Anti,
            positions: vec![0, 1],
        }],
        vec![],
    )
    .unwrap();
    ctx
}

/// `(name, cov, contra, max derivatives)`; derivatives only on all-lower
/// objects, which is where the numeric convention makes them meaningful.
pub type Template = (&'static str, usize, usize, usize);

pub const TEMPLATES: &[Template] = &[
    ("A", 1, 0, 2),
    ("A", 0, 1, 0),
    ("F", 2, 0, 1),
    ("F", 0, 2, 0),
    ("S", 2, 0, 1),
    ("S", 1, 1, 0),
    ("T", 3, 0, 1),
    ("phi", 0, 0, 2),
    ("g", 2, 0, 0),
    ("g", 0, 2, 0),
    ("kdelta", 1, 1, 0),
];

/// Templates without `F` derivatives, for the rewrite-rule corpus.
pub const RULE_TEMPLATES: &[Template] = &[
    ("A", 1, 0, 1),
    ("A", 0, 1, 0),
    ("F", 2, 0, 0),
    ("F", 0, 2, 0),
    ("S", 2, 0, 0),
    ("phi", 0, 0, 1),
    ("g", 0, 2, 0),
    ("kdelta", 1, 1, 0),
];

const DUMMIES: &[&str] = &["a", "b", "c", "d", "e", "f", "h", "i", "j"];

struct Draft {
    name: &'static str,
    cov: usize,
    contra: usize,
    derivs: usize,
}

/// A random valid term whose free indices are exactly `free`.
pub fn random_term(rng: &mut impl Rng, templates: &[Template], free: &[(&str, Variance)]) -> Term {
    let free_up: Vec<&str> = free
        .iter()
        .filter(|(_, v)| *v == Variance::Upper)
        .map(|(l, _)| *l)
        .collect();
    let free_low: Vec<&str> = free
        .iter()
        .filter(|(_, v)| *v == Variance::Lower)
        .map(|(l, _)| *l)
        .collect();
    loop {
        let n = rng.gen_range(1..=4);
        let drafts: Vec<Draft> = (0..n)
            .map(|_| {
                let &(name, cov, contra, max_d) = templates.choose(rng).unwrap();
                Draft {
                    name,
                    cov,
                    contra,
                    derivs: rng.gen_range(0..=max_d),
                }
            })
            .collect();
        let ups: usize = drafts.iter().map(|d| d.contra).sum();
        let lows: usize = drafts.iter().map(|d| d.cov + d.derivs).sum();
        if ups < free_up.len() || lows < free_low.len() || ups - free_up.len() != lows - free_low.len() {
            continue;
        }
        let pairs = ups - free_up.len();
        if pairs > DUMMIES.len() {
            continue;
        }
        let mut up_labels: Vec<&str> = free_up
            .iter()
            .copied()
            .chain(DUMMIES[..pairs].iter().copied())
            .collect();
        let mut low_labels: Vec<&str> = free_low
            .iter()
            .copied()
            .chain(DUMMIES[..pairs].iter().copied())
            .collect();
        up_labels.shuffle(rng);
        low_labels.shuffle(rng);
        let factors = drafts
            .iter()
            .map(|d| {
                let contra: Vec<&str> = up_labels.drain(..d.contra).collect();
                let cov: Vec<&str> = low_labels.drain(..d.cov).collect();
                let derivs: Vec<&str> = low_labels.drain(..d.derivs).collect();
                Indexed::new(d.name, cov, contra).with_derivs(derivs).into()
            })
            .collect();
        let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
        let coeff = rational(sign * rng.gen_range(1..=4_i64), rng.gen_range(1..=3));
        let t = Term::new(coeff, factors);
        if t.validate().is_ok() {
            return t;
        }
    }
}

/// A random free-index signature: scalar, one upper or one lower index.
pub fn random_free(rng: &mut impl Rng) -> Vec<(&'static str, Variance)> {
    match rng.gen_range(0..3) {
        0 => vec![],
        1 => vec![("m", Variance::Upper)],
        _ => vec![("m", Variance::Lower)],
    }
}

/// A sum of one to three random terms sharing one free-index signature.
pub fn random_expression(rng: &mut impl Rng, templates: &[Template]) -> Expression {
    let free = random_free(rng);
    let n = rng.gen_range(1..=3);
    Expression::from_terms((0..n).map(|_| random_term(rng, templates, &free)).collect())
}

/// All assignments of `0..dim` to the free indices of `e`.
pub fn free_assignments(e: &Expression, dim: usize) -> Vec<BTreeMap<IndexName, usize>> {
    let labels: Vec<IndexName> = e.free_indices().unwrap().into_iter().map(|(i, _)| i).collect();
    let mut out = vec![BTreeMap::new()];
    for l in labels {
        out = out
            .into_iter()
            .flat_map(|m| {
                let l = l.clone();
                (0..dim).map(move |v| {
                    let mut m = m.clone();
                    m.insert(l.clone(), v);
                    m
                })
            })
            .collect();
    }
    out
}

/// Sum of the absolute term values: the scale against which a difference
/// is judged, so that exact cancellations are not divided by zero.
pub fn magnitude(ev: &Evaluator, e: &Expression, free: &BTreeMap<IndexName, usize>) -> f64 {
    e.terms
        .iter()
        .map(|t| ev.eval(&Expression::from(t.clone()), free).unwrap().abs())
        .sum()
}

/// Checks `a` and `b` agree numerically at every free-index assignment.
pub fn numerically_equal(
    ev: &Evaluator,
    a: &Expression,
    b: &Expression,
    dim: usize,
    rel_tol: f64,
) -> Result<(), String> {
    for free in free_assignments(a, dim) {
        let va = ev.eval(a, &free).map_err(|e| e.to_string())?;
        let vb = ev.eval(b, &free).map_err(|e| e.to_string())?;
        let scale = magnitude(ev, a, &free).max(magnitude(ev, b, &free)).max(1.0);
        if (va - vb).abs() > rel_tol * scale {
            return Err(format!("{va} vs {vb} at {free:?}"));
        }
    }
    Ok(())
}

/// An assignment in which `F_{ij} = A_{j,i} - A_{i,j}` (with one optional
/// derivative slot), so that `F` agrees with its definition through `A`.
pub fn maxwell_assignment(dim: usize, seed: u64, ctx: &Context) -> ComponentAssignment {
    let base = ComponentAssignment::new(dim, seed).with_metric("g");
    let ev = Evaluator::new(&base, ctx).unwrap();
    let a = |i: usize, derivs: &[usize]| -> f64 {
        let labels: Vec<String> = derivs.iter().enumerate().map(|(k, _)| format!("d{k}")).collect();
        let t = Indexed::new("A", ["x"], Vec::<&str>::new()).with_derivs(labels.iter().map(String::as_str));
        let mut free = BTreeMap::from([(IndexName::new("x"), i)]);
        for (l, v) in labels.iter().zip(derivs) {
            free.insert(IndexName::new(l.as_str()), *v);
        }
        ev.eval(&Expression::factor(t), &free).unwrap()
    };
    let mut overrides = Vec::new();
    for i in 0..dim {
        for j in 0..dim {
            overrides.push(ComponentOverride {
                name: "F".into(),
                rank: 2,
                indices: vec![i, j],
                value: a(j, &[i]) - a(i, &[j]),
            });
            for k in 0..dim {
                overrides.push(ComponentOverride {
                    name: "F".into(),
                    rank: 2,
                    indices: vec![i, j, k],
                    value: a(j, &[i, k]) - a(i, &[j, k]),
                });
            }
        }
    }
    ComponentAssignment { overrides, ..base }
}
