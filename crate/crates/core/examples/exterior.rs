//! Exterior derivatives of covariant forms: the field strength of a
//! potential, the closure dF = 0, and invariance of F under a gauge
//! transformation A -> A + d(theta).

use indicial::algebra::{canonicalize, expand};
use indicial::calculus::extdiff;
use indicial::context::Context;
use indicial::expr::{IndexName, Indexed};
use indicial::parser::parse_expression;

fn main() -> Result<(), indicial::error::Error> {
    let mut ctx = Context::new();
    let idx = IndexName::new;

    let a = parse_expression("A([m],[])")?;
    let f = extdiff(&a, &idx("n"), &ctx)?;
    println!("F_mn = dA = {f}");

    // Register F by its definition and take d again.
    ctx.components
        .define(Indexed::new("F", ["m", "n"], Vec::<&str>::new()), f.clone())?;
    let df = extdiff(&expand(&parse_expression("F([m,n],[])")?, &ctx)?, &idx("k"), &ctx)?;
    println!("\ndF = {df}");
    println!("   = {}", canonicalize(&df, &ctx)?);

    // Gauge transformation: B_m = A_m + theta_{,m}.
    ctx.components.define(
        Indexed::new("B", ["m"], Vec::<&str>::new()),
        parse_expression("A([m],[]) + theta([],[],m)")?,
    )?;
    let fb = extdiff(&expand(&parse_expression("B([m],[])")?, &ctx)?, &idx("n"), &ctx)?;
    println!("\ndB = {fb}");
    println!("dB - dA = {}", canonicalize(&fb.sub(&f), &ctx)?);

    // Only antisymmetric covariant objects are forms.
    if let Err(e) = extdiff(&parse_expression("S([m,n],[])")?, &idx("k"), &ctx) {
        println!("\nextdiff(S_mn): {e}");
    }
    Ok(())
}
