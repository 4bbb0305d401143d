//! Field equations from a scalar Lagrangian density and conservation checks.
//!
//! For a field `phi` the equation is
//!
//! ```text
//! dL/dphi - covdiff(dL/dphi_{,n}, n) = 0
//! ```
//!
//! with both functional derivatives contracted and canonicalized, and the
//! second one optionally folded by rewrite rules before contraction (so that
//! `A_{b,a} - A_{a,b}` can be recognized as `F_{ab}`).

use serde::{Deserialize, Serialize};

use crate::algebra::{canonicalize, contract, expand};
use crate::calculus::{covdiff_inert, fdiff};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::{format_free, Expression, IndexName, Indexed, Variance};
use crate::rules::{apply1, mapcovdiff, RewriteRule};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub label: String,
    pub expr: Expression,
}

/// Result of [`euler_lagrange`], with every intermediate step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldEquation {
    pub field: Indexed,
    /// Label of the derivative slot used for `dL/dphi_{,n}`.
    pub derivative_index: IndexName,
    /// `dL/dphi`, contracted and canonical.
    pub source: Expression,
    /// `dL/dphi_{,n}`, rules applied, contracted and canonical.
    pub momentum: Expression,
    /// Left-hand side of the field equation (`= 0`).
    pub equation: Expression,
    pub trace: Vec<TraceStep>,
}

const DERIVATIVE_LABELS: [&str; 8] = ["n", "p", "q", "r", "s", "t", "u", "v"];

fn derivative_label(lagrangian: &Expression, field: &Indexed) -> IndexName {
    let mut used = lagrangian.labels();
    used.extend(field.cov.iter().chain(&field.contra).cloned());
    DERIVATIVE_LABELS
        .iter()
        .map(|s| IndexName::new(*s))
        .find(|l| !used.contains(l))
        .unwrap_or_else(|| crate::expr::fresh_label(&used))
}

/// Derives the Euler–Lagrange equation of `lagrangian` for `field`.
///
/// `field` names the field and the labels its free indices should carry in
/// the result, e.g. `A([m],[])`. `rules` are applied to `dL/dphi_{,n}`
/// before contraction. The overall sign is fixed so that the first term of
/// `dL/dphi` is positive.
pub fn euler_lagrange(
    lagrangian: &Expression,
    field: &Indexed,
    rules: &[&RewriteRule],
    ctx: &Context,
) -> Result<FieldEquation> {
    let free = lagrangian.free_indices()?;
    if !free.is_empty() {
        return Err(Error::NonScalarLagrangian(format_free(&free)));
    }
    if !field.is_plain() {
        return Err(Error::Unsupported("field with derivative slots".into()));
    }
    let mut trace = Vec::new();
    let mut step = |label: &str, e: &Expression| {
        trace.push(TraceStep {
            label: label.to_string(),
            expr: e.clone(),
        })
    };
    step("lagrangian", lagrangian);

    let d_field = fdiff(lagrangian, field, ctx)?;
    step("dL/dphi", &d_field);
    let source = canonicalize(&contract(&d_field, ctx), ctx)?;
    step("dL/dphi contracted", &source);

    let n = derivative_label(lagrangian, field);
    let field_n = field.clone().with_derivs([n.clone()]);
    let d_grad = fdiff(lagrangian, &field_n, ctx)?;
    step("dL/dphi_n", &d_grad);
    let folded = if rules.is_empty() {
        d_grad
    } else {
        apply1(&d_grad, rules, ctx)?
    };
    step("dL/dphi_n rules applied", &folded);
    let momentum = canonicalize(&contract(&expand(&folded, ctx)?, ctx), ctx)?;
    step("dL/dphi_n contracted", &momentum);

    let divergence = covdiff_inert(&momentum, &n, ctx);
    step("divergence", &divergence);
    let mut equation = canonicalize(&source.sub(&divergence), ctx)?;
    let mut source = source;
    let mut momentum = momentum;
    if source.terms.first().is_some_and(|t| t.coeff < num_traits::Zero::zero()) {
        equation = equation.neg();
        source = source.neg();
        momentum = momentum.neg();
    }
    step("field equation", &equation);
    Ok(FieldEquation {
        field: field.clone(),
        derivative_index: n,
        source,
        momentum,
        equation,
        trace,
    })
}

/// Divergence of a vector-valued expression in `index`, simplified by
/// `rules` and canonicalized; zero means the quantity is conserved.
pub fn check_conservation(
    lhs: &Expression,
    index: &IndexName,
    rules: &[&RewriteRule],
    ctx: &Context,
) -> Result<Expression> {
    let free = lhs.free_indices()?;
    let expected = (index.clone(), Variance::Upper);
    if lhs.is_zero() || free.len() != 1 || !free.contains(&expected) {
        return Err(Error::FreeIndexMismatch(format!(
            "expected exactly ^{index}, found {}",
            format_free(&free)
        )));
    }
    let div = mapcovdiff(lhs, index, ctx);
    let simplified = if rules.is_empty() {
        div
    } else {
        apply1(&div, rules, ctx)?
    };
    canonicalize(&simplified, ctx)
}
