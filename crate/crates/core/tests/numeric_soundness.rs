//! Property tests: every algebraic transformation must leave the numeric
//! value of a random expression unchanged under random component values.
//!
//! Case generation is seeded from `INDICIAL_SEED` so failures reproduce.

mod common;

use std::collections::BTreeMap;

use indicial::algebra::{canonicalize, contract, expand};
use indicial::calculus::{fdiff, idiff};
use indicial::context::Context;
use indicial::expr::{Expression, IndexName, Indexed};
use indicial::numeval::{ComponentAssignment, Evaluator};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn runner(stream: &str, cases: u32) -> TestRunner {
    let mut seed = [0u8; 32];
    let base = common::base_seed().to_le_bytes();
    seed[..8].copy_from_slice(&base);
    seed[8..8 + stream.len().min(24)].copy_from_slice(&stream.as_bytes()[..stream.len().min(24)]);
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &seed))
}

/// A random expression together with the component seed and dimension to
/// evaluate it with. Shrinking works on the seeds, not the expression.
fn cases(templates: &'static [common::Template]) -> impl Strategy<Value = (Expression, u64, usize)> {
    (any::<u64>(), any::<u64>(), 2usize..=3).prop_map(move |(shape, values, dim)| {
        let mut rng = ChaCha8Rng::seed_from_u64(shape);
        (common::random_expression(&mut rng, templates), values, dim)
    })
}

fn same_value(ctx: &Context, a: &Expression, b: &Expression, seed: u64, dim: usize) -> Result<(), TestCaseError> {
    let assign = ComponentAssignment::new(dim, seed).with_metric("g");
    let ev = Evaluator::new(&assign, ctx).map_err(|e| TestCaseError::fail(e.to_string()))?;
    common::numerically_equal(&ev, a, b, dim, TOL).map_err(|m| TestCaseError::fail(format!("`{a}` vs `{b}`: {m}")))
}

fn check(stream: &str, n: u32, property: impl Fn(&Context, &Expression, u64, usize) -> Result<(), TestCaseError>) {
    let ctx = common::corpus_context();
    runner(stream, n)
        .run(&cases(common::TEMPLATES), |(e, seed, dim)| {
            property(&ctx, &e, seed, dim)
        })
        .unwrap();
}

#[test]
fn renaming_dummies_preserves_value() {
    check("rename", 150, |ctx, e, seed, dim| {
        same_value(ctx, e, &e.rename_dummies(), seed, dim)
    });
}

#[test]
fn contraction_preserves_value() {
    check("contract", 150, |ctx, e, seed, dim| {
        same_value(ctx, e, &contract(e, ctx), seed, dim)
    });
}

#[test]
fn canonical_form_preserves_value() {
    check("canform", 150, |ctx, e, seed, dim| {
        let c = canonicalize(e, ctx).map_err(|err| TestCaseError::fail(err.to_string()))?;
        same_value(ctx, e, &c, seed, dim)
    });
}

#[test]
fn contract_then_canform_preserves_value() {
    check("contract-canform", 150, |ctx, e, seed, dim| {
        let c = canonicalize(&contract(e, ctx), ctx).map_err(|err| TestCaseError::fail(err.to_string()))?;
        same_value(ctx, e, &c, seed, dim)
    });
}

#[test]
fn canonical_form_ignores_dummy_names() {
    check("canform-relabel", 150, |ctx, e, _, _| {
        let shifted = e.rename_dummies().freshen_against(&e.labels());
        let a = canonicalize(e, ctx).map_err(|err| TestCaseError::fail(err.to_string()))?;
        let b = canonicalize(&shifted, ctx).map_err(|err| TestCaseError::fail(err.to_string()))?;
        prop_assert_eq!(a, b);
        Ok(())
    });
}

#[test]
fn canonical_form_is_idempotent() {
    check("canform-idempotent", 150, |ctx, e, _, _| {
        let once = canonicalize(e, ctx).map_err(|err| TestCaseError::fail(err.to_string()))?;
        let twice = canonicalize(&once, ctx).map_err(|err| TestCaseError::fail(err.to_string()))?;
        prop_assert_eq!(once, twice);
        Ok(())
    });
}

#[test]
fn difference_with_itself_is_zero() {
    check("self-difference", 100, |ctx, e, _, _| {
        let d = canonicalize(&e.sub(&e.rename_dummies()), ctx).map_err(|err| TestCaseError::fail(err.to_string()))?;
        prop_assert!(d.is_zero(), "{}", d);
        Ok(())
    });
}

#[test]
fn substituting_field_strength_preserves_value() {
    let ctx = common::corpus_context();
    let mut with_def = ctx.clone();
    with_def.symmetries.remove("F");
    with_def
        .components
        .define(
            Indexed::new("F", ["m", "n"], Vec::<&str>::new()),
            indicial::parser::parse_expression("A([n],[],m) - A([m],[],n)").unwrap(),
        )
        .unwrap();
    runner("expand", 100)
        .run(&cases(common::RULE_TEMPLATES), |(e, seed, dim)| {
            let assign = common::maxwell_assignment(dim, seed, &ctx);
            let ev = Evaluator::new(&assign, &ctx).unwrap();
            let x = expand(&e, &with_def).map_err(|err| TestCaseError::fail(err.to_string()))?;
            common::numerically_equal(&ev, &e, &x, dim, TOL).map_err(TestCaseError::fail)
        })
        .unwrap();
}

#[test]
fn leibniz_rule_holds_symbolically() {
    check("leibniz", 100, |ctx, e, _, _| {
        let c = IndexName::new("z");
        let (head, tail) = match e.terms[0].factors.split_first() {
            Some((h, t)) if !t.is_empty() => (h.clone(), t.to_vec()),
            _ => return Ok(()),
        };
        let coeff = e.terms[0].coeff.clone();
        let a = Expression::factor(head);
        let b = Expression::from(indicial::expr::Term::new(coeff, tail));
        let lhs = idiff(&e.terms[0].clone().into(), &c, ctx);
        let rhs = idiff(&a, &c, ctx).mul(&b).add(&a.mul(&idiff(&b, &c, ctx)));
        let d = canonicalize(&lhs.sub(&rhs), ctx).map_err(|err| TestCaseError::fail(err.to_string()))?;
        prop_assert!(d.is_zero(), "{}", d);
        Ok(())
    });
}

/// `fdiff` against central finite differences: perturbing one component of
/// the target changes the expression at the rate given by the derivative.
#[test]
fn functional_derivative_matches_finite_differences() {
    const H: f64 = 1e-4;
    const FD_TOL: f64 = 1e-6;
    let ctx = common::corpus_context();
    let targets = ["A([x],[])", "A([x],[],y)", "phi([],[],x)"];
    let strategy = (any::<u64>(), any::<u64>(), 0..targets.len()).prop_map(|(shape, values, t)| {
        let mut rng = ChaCha8Rng::seed_from_u64(shape);
        // Scalars only: the derivative's free indices are then those of the target.
        let e = Expression::from_terms(
            (0..2)
                .map(|_| common::random_term(&mut rng, common::TEMPLATES, &[]))
                .collect(),
        );
        (e, values, t)
    });
    runner("fdiff", 60)
        .run(&strategy, |(e, seed, t)| {
            let dim = 2;
            let src = targets[t];
            let target = indicial::parser::parse_expression(src).unwrap().terms[0].factors[0]
                .as_indexed()
                .unwrap()
                .clone();
            let (name, rank) = (target.name.as_str(), target.rank());
            let d = fdiff(&e, &target, &ctx).map_err(|err| TestCaseError::fail(err.to_string()))?;
            let labels: Vec<IndexName> = target
                .cov
                .iter()
                .chain(target.derivs.iter().map(|s| &s.index))
                .cloned()
                .collect();
            let plain = ComponentAssignment::new(dim, seed).with_metric("g");
            let ev = Evaluator::new(&plain, &ctx).unwrap();
            // Enumerate over the target's labels: a zero derivative has none free.
            let probe = Expression::factor(target.clone());
            for free in common::free_assignments(&probe, dim) {
                let idx: Vec<usize> = labels.iter().map(|l| free[l]).collect();
                let value = |delta: f64| {
                    let a =
                        ComponentAssignment::new(dim, seed)
                            .with_metric("g")
                            .perturbed(name, rank, idx.clone(), delta);
                    indicial::numeval::numeric_eval(&e, &a, &ctx, &BTreeMap::new()).unwrap()
                };
                let fd = (value(H) - value(-H)) / (2.0 * H);
                let sym = ev.eval(&d, &free).unwrap();
                prop_assert!(
                    (fd - sym).abs() <= FD_TOL * fd.abs().max(sym.abs()).max(1.0),
                    "d/d{} of `{}` at {:?}: symbolic {}, finite difference {}",
                    src,
                    e,
                    free,
                    sym,
                    fd
                );
            }
            Ok(())
        })
        .unwrap();
}
