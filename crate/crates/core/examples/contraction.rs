//! Einstein summation: raising, lowering and tracing with the metric and
//! the Kronecker delta.

use indicial::algebra::{canonicalize, contract};
use indicial::context::{Context, Dimension};
use indicial::parser::parse_expression;

fn show(ctx: &Context, src: &str) {
    let e = parse_expression(src).unwrap();
    let c = canonicalize(&contract(&e, ctx), ctx).unwrap();
    println!("{:<40} => {c}", e.to_string());
}

fn main() {
    let mut ctx = Context::with_metric("g");

    show(&ctx, "g([],[a,b])*x([b],[])");
    show(&ctx, "g([a,b],[])*g([],[b,c])");
    show(&ctx, "g([],[a,b])*g([],[c,d])*F([a,c],[])*F([b,d],[])");
    show(&ctx, "kdelta([a],[b])*kdelta([b],[c])*v([],[a])");

    // Traces stay symbolic until the dimension is fixed.
    show(&ctx, "kdelta([a],[a])");
    ctx.set_dimension(Dimension::Fixed(4));
    show(&ctx, "kdelta([a],[b])*kdelta([b],[a])");

    // A differentiated metric is not an index-raising operator.
    show(&ctx, "g([a,b],[],c)*x([],[b])");

    // An index shared three times is rejected when the product is built.
    if let Err(e) = parse_expression("x([a],[])*y([],[a])*z([a],[])") {
        println!("x_a y^a z_a: {e}");
    }
}
