//! Parsing script syntax and printing in every output format; the plain
//! and script forms read back to the same expression.

use indicial::expr::Expression;
use indicial::parser::{parse_display, parse_expression};
use indicial::render::{render, Format};

fn main() -> Result<(), indicial::error::Error> {
    let sources = [
        "-1/4*F([k,l],[])*F([a,b],[])*g([],[k,a])*g([],[l,b])",
        "j([],[m]) - 'covdiff(F([],[m,n]),n)",
        "A([m],[],k,n)*T([],[k,n])",
        "'covdiff(g([],[a,b])*phi([],[],b),a)",
        "(x([a],[])*y([],[a]))^2",
        "mu([],[alpha])*kdelta([alpha],[beta])",
    ];
    for src in sources {
        let e = parse_expression(src)?;
        println!("{src}");
        for f in [Format::Plain, Format::Latex, Format::Script, Format::Json] {
            println!("  {:<7}{}", f.to_string(), render(&e, f));
        }
        let plain: Expression = parse_display(&render(&e, Format::Plain))?;
        let script = parse_expression(&render(&e, Format::Script))?;
        println!("  round trip: {}\n", plain == e && script == e);
    }

    for bad in ["x([a],[]", "x([a],[])*y([a],[])", "frobnicate(1)"] {
        match parse_expression(bad) {
            Err(e) => println!("{bad:<22} error: {e}"),
            Ok(e) => println!("{bad:<22} parsed as {e}"),
        }
    }
    Ok(())
}
