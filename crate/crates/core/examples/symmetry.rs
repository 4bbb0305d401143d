//! Declared index symmetries and canonical forms: antisymmetric and
//! symmetric tensors, renamed dummies, and terms that vanish by symmetry.

use indicial::algebra::{canonicalize, decsym, decsym_all};
use indicial::context::Context;
use indicial::parser::parse_expression;
use indicial::symmetry::{Block, BlockKind};

fn main() -> Result<(), indicial::error::Error> {
    let mut ctx = Context::with_metric("g");
    decsym_all(&mut ctx, "F", 2, 0, Some(BlockKind::Anti), None)?;
    decsym_all(&mut ctx, "F", 0, 2, None, Some(BlockKind::Anti))?;
    decsym_all(&mut ctx, "S", 2, 0, Some(BlockKind::Sym), None)?;
    // Antisymmetric in the first pair only.
    decsym(
        &mut ctx,
        "T",
        3,
        0,
        vec![Block {
            kind: BlockKind::Anti,
            positions: vec![0, 1],
        }],
        vec![],
    )?;

    let cases = [
        "F([b,a],[])",
        "F([a,b],[]) + F([b,a],[])",
        "S([b,a],[]) - S([a,b],[])",
        "S([a,b],[])*F([],[a,b])",
        "T([b,a,c],[]) + T([a,b,c],[])",
        "T([a,c,b],[]) + T([a,b,c],[])",
        "x([a],[])*y([],[a]) - x([c],[])*y([],[c])",
        "F([a,b],[])*F([],[a,b]) + F([c,d],[])*F([],[d,c])",
        "3/2*F([m,n],[])*v([],[n]) + 1/2*F([n,m],[])*v([],[n])",
        "A([a],[],b,c) - A([a],[],c,b)",
    ];
    for src in cases {
        let e = parse_expression(src)?;
        println!("{:<50} => {}", e.to_string(), canonicalize(&e, &ctx)?);
    }
    Ok(())
}
