//! Covariant derivatives: Christoffel symbols, the expanded derivative of
//! vectors and covectors, and metric compatibility.

use indicial::algebra::{canonicalize, contract};
use indicial::calculus::{christoffel, covdiff, covdiff_inert, ev_ichr2};
use indicial::context::Context;
use indicial::expr::IndexName;
use indicial::parser::parse_expression;

fn main() -> Result<(), indicial::error::Error> {
    let ctx = Context::with_metric("g");
    let idx = IndexName::new;

    println!("Gamma^c_ab = {}", christoffel(&idx("a"), &idx("b"), &idx("c"), &ctx)?);

    for src in ["v([],[i])", "w([i],[])", "T([j],[i])"] {
        let e = parse_expression(src)?;
        let d = covdiff(&e, &idx("k"), &ctx)?;
        println!("\ncovdiff({e}, k)");
        println!("  = {d}");
        println!("  = {}", ev_ichr2(&d, &ctx)?);
    }

    // The metric is covariantly constant once the connection is expanded.
    let g = parse_expression("g([a,b],[])")?;
    let dg = ev_ichr2(&covdiff(&g, &idx("k"), &ctx)?, &ctx)?;
    println!("\ng_{{ab;k}} = {dg}");
    println!("          = {}", canonicalize(&contract(&dg, &ctx), &ctx)?);

    // The inert form only records the derivative.
    let flux = parse_expression("g([],[a,b])*phi([],[],b)")?;
    println!("\ninert: {}", covdiff_inert(&flux, &idx("a"), &ctx));
    Ok(())
}
