//! Algebraic simplifiers: expansion, contraction, symmetry declarations and
//! the canonicalizer.

mod canform;
mod contract;

pub use canform::{candidate_count, canform, canonical_term, MAX_CANDIDATES};
pub(crate) use canform::{canonical_term_keyed, TermKey};
pub use contract::{contract, contract_term};

use crate::context::Context;
use crate::error::Result;
use crate::expr::Expression;
use crate::symmetry::{Block, BlockKind, SymmetryDeclaration};

/// Distributes products over sums and substitutes active component
/// definitions. The result is a flat sum; like terms are not collected.
pub fn expand(expr: &Expression, ctx: &Context) -> Result<Expression> {
    crate::rules::substitute_components(expr, ctx)
}

/// Declares symmetry blocks for `name` with the given signature.
pub fn decsym(
    ctx: &mut Context,
    name: &str,
    cov: usize,
    contra: usize,
    cov_blocks: Vec<Block>,
    contra_blocks: Vec<Block>,
) -> Result<()> {
    let decl = SymmetryDeclaration::new(name, cov, contra, cov_blocks, contra_blocks)?;
    ctx.symmetries.declare(decl)
}

/// `decsym(name, cov, contra, [kind(all)], [kind(all)])`-style shorthand.
pub fn decsym_all(
    ctx: &mut Context,
    name: &str,
    cov: usize,
    contra: usize,
    cov_kind: Option<BlockKind>,
    contra_kind: Option<BlockKind>,
) -> Result<()> {
    let cov_blocks = cov_kind.map(|k| vec![Block::all(k, cov)]).unwrap_or_default();
    let contra_blocks = contra_kind.map(|k| vec![Block::all(k, contra)]).unwrap_or_default();
    decsym(ctx, name, cov, contra, cov_blocks, contra_blocks)
}

/// `canform` against the context's symmetry table.
pub fn canonicalize(expr: &Expression, ctx: &Context) -> Result<Expression> {
    canform(expr, &ctx.symmetries)
}
