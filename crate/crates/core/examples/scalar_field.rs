//! Euler–Lagrange equations of a scalar field, with every intermediate
//! step of the derivation printed.

use indicial::context::Context;
use indicial::expr::Indexed;
use indicial::lagrangian::euler_lagrange;
use indicial::parser::parse_expression;

fn derive(ctx: &Context, name: &str, src: &str) -> Result<(), indicial::error::Error> {
    let l = parse_expression(src)?;
    let eq = euler_lagrange(&l, &Indexed::scalar("phi"), &[], ctx)?;
    println!("== {name}");
    for step in &eq.trace {
        println!("  {:<26} {}", step.label, step.expr);
    }
    println!("  => {} = 0\n", eq.equation);
    Ok(())
}

fn main() -> Result<(), indicial::error::Error> {
    let ctx = Context::with_metric("g");
    derive(&ctx, "massless", "1/2*g([],[a,b])*phi([],[],a)*phi([],[],b)")?;
    derive(
        &ctx,
        "massive",
        "1/2*g([],[a,b])*phi([],[],a)*phi([],[],b) - 1/2*M*phi^2",
    )?;
    derive(
        &ctx,
        "with a source",
        "1/2*g([],[a,b])*phi([],[],a)*phi([],[],b) + rho*phi",
    )?;

    // A Lagrangian with a free index is not a density.
    let bad = parse_expression("phi([],[],a)")?;
    if let Err(e) = euler_lagrange(&bad, &Indexed::scalar("phi"), &[], &ctx) {
        println!("phi_{{,a}}: {e}");
    }
    Ok(())
}
