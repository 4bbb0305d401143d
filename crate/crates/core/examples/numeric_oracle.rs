//! Numeric spot checks: assign pseudo-random component values (respecting
//! declared symmetries) and compare an expression with its simplification
//! index by index.

use std::collections::BTreeMap;

use indicial::algebra::{canonicalize, contract, decsym_all};
use indicial::context::Context;
use indicial::expr::IndexName;
use indicial::numeval::{ComponentAssignment, Evaluator};
use indicial::parser::parse_expression;
use indicial::symmetry::BlockKind;

fn main() -> Result<(), indicial::error::Error> {
    let mut ctx = Context::with_metric("g");
    decsym_all(&mut ctx, "F", 2, 0, Some(BlockKind::Anti), None)?;

    let dim = 3;
    let assign = ComponentAssignment::new(dim, 7).with_metric("g");
    let ev = Evaluator::new(&assign, &ctx)?;

    let e = parse_expression("g([],[a,b])*F([a,m],[])*x([b],[]) + 3*F([m,c],[])*x([],[c])")?;
    let simplified = canonicalize(&contract(&e, &ctx), &ctx)?;
    println!("e          = {e}");
    println!("simplified = {simplified}\n");
    for m in 0..dim {
        let free = BTreeMap::from([(IndexName::new("m"), m)]);
        println!(
            "m = {m}: {:>12.9} {:>12.9}",
            ev.eval(&e, &free)?,
            ev.eval(&simplified, &free)?
        );
    }

    // The trace of the metric is the dimension.
    let trace = parse_expression("g([],[a,b])*g([a,b],[])")?;
    println!("\ng^ab g_ab = {:.12}", ev.eval(&trace, &BTreeMap::new())?);

    // Inert covariant derivatives have no numeric meaning.
    let inert = parse_expression("'covdiff(x([],[a]),a)")?;
    if let Err(e) = ev.eval(&inert, &BTreeMap::new()) {
        println!("x^a_;a: {e}");
    }
    Ok(())
}
