//! Pattern rewriting: metavariables bound to indices, two-term patterns,
//! rules applied to a fixpoint, and rules over inert derivatives.

use indicial::algebra::{canonicalize, decsym_all};
use indicial::context::Context;
use indicial::parser::parse_expression;
use indicial::rules::{apply1, RuleTable};
use indicial::symmetry::BlockKind;

fn main() -> Result<(), indicial::error::Error> {
    let mut ctx = Context::with_metric("g");
    decsym_all(&mut ctx, "F", 2, 0, Some(BlockKind::Anti), None)?;
    decsym_all(&mut ctx, "F", 0, 2, None, Some(BlockKind::Anti))?;

    let mut rules = RuleTable::default();
    rules.matchdeclare("a", "atom")?;
    rules.matchdeclare("b", "atom")?;

    // Fold the curl of A back into F; either sign or ordering matches.
    rules.defrule(
        "Maxwell",
        parse_expression("A([b],[],a) - A([a],[],b)")?,
        parse_expression("F([a,b],[])")?,
    )?;
    let maxwell = rules.get("Maxwell")?.clone();
    for src in [
        "A([n],[],m) - A([m],[],n)",
        "3*j([],[m])*A([m],[],n) - 3*j([],[m])*A([n],[],m)",
        "A([n],[],m)*v([],[n]) - A([m],[],n)*v([],[n]) + w([m],[])",
        "A([n],[],m) + A([m],[],n)",
    ] {
        let e = parse_expression(src)?;
        let r = apply1(&e, &[&maxwell], &ctx)?;
        println!("{:<55} => {}", e.to_string(), canonicalize(&r, &ctx)?);
    }

    // Antisymmetric F contracted with commuting derivatives vanishes.
    rules.defrule(
        "CC",
        parse_expression("'covdiff('covdiff(F([],[a,b]),b),a)")?,
        parse_expression("0")?,
    )?;
    let cc = rules.get("CC")?.clone();
    let e = parse_expression("'covdiff('covdiff(F([],[m,n]),n),m) + 'covdiff(j([],[m]),m)")?;
    println!("\n{e}\n  => {}", apply1(&e, &[&cc], &ctx)?);

    // Replacements may not introduce unbound metavariables.
    if let Err(e) = rules.defrule("Bad", parse_expression("x([a],[])")?, parse_expression("y([b],[])")?) {
        println!("\nBad: {e}");
    }
    Ok(())
}
