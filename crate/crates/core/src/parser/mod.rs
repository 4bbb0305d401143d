//! Script language: a small, faithful subset of the Maxima/itensor session
//! syntax.
//!
//! ```text
//! statement  := (NAME ':')? expr (';' | '$')
//! expr       := sum ('=' sum)?
//! sum        := product (('+' | '-') product)*
//! product    := unary (('*' | '/') unary)*
//! unary      := '-' unary | power
//! power      := primary ('^' unary)?
//! primary    := INT | NAME | "'"? NAME '(' args ')' | '(' expr ')' | '[' args ']'
//! ```
//!
//! A call whose first argument is a list is an indexed object,
//! `T([a,b],[c,i],i2,i1)`; any other call must name a known function.
//! Comments run from `/*` to `*/`.

mod ast;
pub mod display;
mod lexer;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

pub use ast::{Ast, Statement, StatementKind};
pub use display::parse_display;

use crate::calculus::{covdiff_inert, idiff};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::{Expression, IndexName, Indexed, Rational};
use lexer::{Spanned, Tok};

/// Top-level calls that act on the session rather than only returning a value.
pub const COMMANDS: &[&str] = &[
    "imetric",
    "idim",
    "igeowedge_flag",
    "decsym",
    "components",
    "remcomps",
    "matchdeclare",
    "defrule",
    "apply1",
    "ishow",
    "canform",
    "contract",
    "expand",
    "diff",
    "idiff",
    "covdiff",
    "extdiff",
    "load",
];

/// Every function name the evaluator understands.
pub const FUNCTIONS: &[&str] = &[
    "lhs",
    "map",
    "lambda",
    "mapcovdiff",
    "rename",
    "ev",
    "christoffel",
    "eulerlagrange",
    "conservation",
    "%th",
    "anti",
    "sym",
    "apply",
    "quit",
];

pub fn is_known_function(name: &str) -> bool {
    COMMANDS.contains(&name) || FUNCTIONS.contains(&name)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self> {
        Ok(Parser {
            toks: lexer::tokenize(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let (line, column) = match self.toks.get(self.pos).or(self.toks.last()) {
            Some(t) => (t.line, t.column),
            None => (1, 1),
        };
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn line(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.line).unwrap_or(1)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn statement(&mut self) -> Result<Statement> {
        let line = self.line();
        let kind = if let (Some(Tok::Ident(name)), Some(Tok::Colon)) = (self.peek(), self.peek_at(1)) {
            let name = name.clone();
            self.pos += 2;
            let value = self.expr()?;
            if name == "igeowedge_flag" {
                StatementKind::Command(name, vec![value])
            } else {
                StatementKind::Assignment(name, value)
            }
        } else {
            let e = self.expr()?;
            classify(e)
        };
        match self.peek() {
            Some(Tok::Terminator { echo }) => {
                let echo = *echo;
                self.pos += 1;
                Ok(Statement { kind, echo, line })
            }
            _ => Err(self.error("expected `;` or `$`")),
        }
    }

    fn expr(&mut self) -> Result<Ast> {
        let lhs = self.sum()?;
        if self.eat(&Tok::Equals) {
            let rhs = self.sum()?;
            return Ok(Ast::Equation(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn sum(&mut self) -> Result<Ast> {
        let mut acc = self.product()?;
        loop {
            if self.eat(&Tok::Plus) {
                acc = Ast::Add(Box::new(acc), Box::new(self.product()?));
            } else if self.eat(&Tok::Minus) {
                acc = Ast::Sub(Box::new(acc), Box::new(self.product()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<Ast> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(&Tok::Star) {
                acc = Ast::Mul(Box::new(acc), Box::new(self.unary()?));
            } else if self.eat(&Tok::Slash) {
                acc = Ast::Div(Box::new(acc), Box::new(self.unary()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Ast> {
        if self.eat(&Tok::Minus) {
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        if self.eat(&Tok::Plus) {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Ast> {
        let base = self.primary()?;
        if self.eat(&Tok::Caret) {
            return Ok(Ast::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn args(&mut self, close: &Tok, what: &str) -> Result<Vec<Ast>> {
        let mut args = Vec::new();
        if self.eat(close) {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat(close) {
                return Ok(args);
            }
            self.expect(&Tok::Comma, &format!("`,` or {what}"))?;
        }
    }

    fn primary(&mut self) -> Result<Ast> {
        let start = self.pos;
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Ast::Number(n))
            }
            Some(Tok::Quote) => {
                self.pos += 1;
                match self.primary()? {
                    Ast::Call { name, args, .. } => Ok(Ast::Call {
                        name,
                        args,
                        quoted: true,
                    }),
                    Ast::Ident(name) => Ok(Ast::Ident(name)),
                    _ => {
                        self.pos = start;
                        Err(self.error("expected a name after `'`"))
                    }
                }
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.eat(&Tok::LParen) {
                    let args = self.args(&Tok::RParen, "`)`")?;
                    if !is_known_function(&name) && !matches!(args.first(), Some(Ast::List(_))) {
                        return Err(Error::UnknownCommand(name));
                    }
                    Ok(Ast::Call {
                        name,
                        args,
                        quoted: false,
                    })
                } else {
                    Ok(Ast::Ident(name))
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::LBracket) => {
                self.pos += 1;
                Ok(Ast::List(self.args(&Tok::RBracket, "`]`")?))
            }
            _ => Err(self.error("expected an expression")),
        }
    }
}

fn classify(e: Ast) -> StatementKind {
    match e {
        Ast::Ident(ref n) if n == "quit" => StatementKind::Quit,
        Ast::Call { ref name, .. } if name == "quit" => StatementKind::Quit,
        Ast::Call {
            ref name,
            ref args,
            quoted: false,
        } if name == "apply" && args.len() == 2 && args[0].as_ident() == Some("defrule") => match &args[1] {
            Ast::List(items) => StatementKind::Command("defrule".into(), items.clone()),
            _ => StatementKind::Expression(e),
        },
        Ast::Call {
            name,
            args,
            quoted: false,
        } if COMMANDS.contains(&name.as_str()) => StatementKind::Command(name, args),
        other => StatementKind::Expression(other),
    }
}

/// Parses a whole script into statements.
pub fn parse_script(src: &str) -> Result<Vec<Statement>> {
    let mut p = Parser::new(src)?;
    let mut out = Vec::new();
    while !p.at_end() {
        out.push(p.statement()?);
    }
    Ok(out)
}

/// Parses exactly one terminated statement.
pub fn parse_statement(src: &str) -> Result<Statement> {
    let mut p = Parser::new(src)?;
    let s = p.statement()?;
    if !p.at_end() {
        return Err(p.error("more than one statement"));
    }
    Ok(s)
}

/// Parses an expression to its syntax tree; a trailing terminator is allowed.
pub fn parse_ast(src: &str) -> Result<Ast> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    if matches!(p.peek(), Some(Tok::Terminator { .. })) {
        p.pos += 1;
    }
    if !p.at_end() {
        return Err(p.error("unexpected input after expression"));
    }
    Ok(e)
}

/// Parses a pure expression: indexed objects, rational arithmetic, integer
/// powers, `'covdiff` and `idiff`. The result is validated (index
/// repetition and free-index agreement across terms).
pub fn parse_expression(src: &str) -> Result<Expression> {
    let e = pure_expression(&parse_ast(src)?)?;
    e.validate()?;
    Ok(e)
}

pub(crate) fn index_label(a: &Ast) -> Result<IndexName> {
    match a {
        Ast::Ident(s) => Ok(IndexName::new(s.as_str())),
        other => Err(Error::NotAnExpression(format!("{other:?} is not an index"))),
    }
}

fn index_list(a: &Ast) -> Result<Vec<IndexName>> {
    match a {
        Ast::List(items) => items.iter().map(index_label).collect(),
        other => Err(Error::NotAnExpression(format!("{other:?} is not an index list"))),
    }
}

/// `T([cov],[contra],d1,d2,...)`; the contravariant list may be omitted.
pub(crate) fn indexed_from_call(name: &str, args: &[Ast]) -> Result<Indexed> {
    let cov = index_list(&args[0])?;
    let (contra, rest) = match args.get(1) {
        Some(a @ Ast::List(_)) => (index_list(a)?, &args[2..]),
        _ => (Vec::new(), &args[1..]),
    };
    let derivs = rest.iter().map(index_label).collect::<Result<Vec<_>>>()?;
    Ok(Indexed::new(name, cov, contra).with_derivs(derivs))
}

/// `a * b` as written by a user: a dummy of one operand that is free in the
/// other would occur three times, so it is rejected rather than renamed.
/// Dummies shared by both operands are renamed apart, as in `(x_a y^a)^2`.
pub(crate) fn product(a: &Expression, b: &Expression) -> Result<Expression> {
    let dummies = |e: &Expression| {
        e.terms
            .iter()
            .flat_map(|t| t.dummies())
            .collect::<std::collections::BTreeSet<_>>()
    };
    let free = |e: &Expression| -> Result<std::collections::BTreeSet<IndexName>> {
        Ok(e.free_indices()?.into_iter().map(|(i, _)| i).collect())
    };
    for (d, f) in [(dummies(a), free(b)?), (dummies(b), free(a)?)] {
        if let Some(i) = d.intersection(&f).next() {
            return Err(Error::TripleIndex(i.to_string()));
        }
    }
    Ok(a.mul(b))
}

/// `a / b` where `b` must be a nonzero number.
pub(crate) fn divide(a: &Expression, b: &Expression) -> Result<Expression> {
    let c = constant_value(b)
        .filter(|c| !c.is_zero())
        .ok_or_else(|| Error::Unsupported("division by a non-constant or zero".into()))?;
    Ok(a.scale(&(Rational::from_integer(1.into()) / c)))
}

/// `a ^ n` for a non-negative integer literal `n`.
pub(crate) fn power(a: &Expression, n: &Ast) -> Result<Expression> {
    match n {
        Ast::Number(k) if !k.is_negative() => {
            let k = k
                .to_u32()
                .ok_or_else(|| Error::Unsupported("exponent too large".into()))?;
            Ok(a.pow(k))
        }
        _ => Err(Error::Unsupported("only non-negative integer powers".into())),
    }
}

pub(crate) fn constant_value(e: &Expression) -> Option<Rational> {
    match e.terms.as_slice() {
        [] => Some(Rational::zero()),
        [t] if t.factors.is_empty() => Some(t.coeff.clone()),
        _ => None,
    }
}

pub(crate) fn number(n: &BigInt) -> Expression {
    Expression::number(Rational::from_integer(n.clone()))
}

fn pure_expression(a: &Ast) -> Result<Expression> {
    let ctx = Context::new();
    let rec = pure_expression;
    Ok(match a {
        Ast::Number(n) => number(n),
        Ast::Ident(s) => Expression::factor(Indexed::scalar(s.as_str())),
        Ast::Neg(x) => rec(x)?.neg(),
        Ast::Add(x, y) => rec(x)?.add(&rec(y)?),
        Ast::Sub(x, y) | Ast::Equation(x, y) => rec(x)?.sub(&rec(y)?),
        Ast::Mul(x, y) => product(&rec(x)?, &rec(y)?)?,
        Ast::Div(x, y) => divide(&rec(x)?, &rec(y)?)?,
        Ast::Pow(x, n) => power(&rec(x)?, n)?,
        Ast::Call { name, args, quoted } => match (name.as_str(), args.as_slice(), quoted) {
            ("covdiff", [e, rest @ ..], true) if !rest.is_empty() => {
                let mut acc = rec(e)?;
                for i in rest {
                    acc = covdiff_inert(&acc, &index_label(i)?, &ctx);
                }
                acc
            }
            ("idiff", [e, rest @ ..], _) if !rest.is_empty() => {
                let mut acc = rec(e)?;
                for i in rest {
                    acc = idiff(&acc, &index_label(i)?, &ctx);
                }
                acc
            }
            (_, [Ast::List(_), ..], _) => Expression::factor(indexed_from_call(name, args)?),
            _ => return Err(Error::NotAnExpression(format!("{name}(...) in a pure expression"))),
        },
        Ast::List(_) => return Err(Error::NotAnExpression("list".into())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{rational, DerivSlot};

    #[test]
    fn indexed_object_with_derivatives() {
        let e = parse_expression("T([a,b],[c,i],i2,i1)").unwrap();
        let t = e.terms[0].factors[0].as_indexed().unwrap();
        assert_eq!(t.cov, vec!["a".into(), "b".into()]);
        assert_eq!(t.contra, vec!["c".into(), "i".into()]);
        assert_eq!(t.derivs, vec![DerivSlot::ordinary("i2"), DerivSlot::ordinary("i1")]);
    }

    #[test]
    fn lagrangian_has_two_terms() {
        let e =
            parse_expression("-1/4*F([k,l],[])*F([a,b],[])*g([],[k,a])*g([],[l,b])+j([k],[])*A([l],[])*g([],[k,l])")
                .unwrap();
        assert_eq!(e.terms.len(), 2);
        assert_eq!(e.terms[0].coeff, rational(-1, 4));
        e.validate().unwrap();
    }

    #[test]
    fn single_list_means_covariant() {
        let e = parse_expression("F([k,l])").unwrap();
        assert_eq!(e.terms[0].factors[0].as_indexed().unwrap().cov.len(), 2);
    }

    #[test]
    fn statements() {
        let s = parse_statement("imetric(g)$").unwrap();
        assert_eq!(
            s.kind,
            StatementKind::Command("imetric".into(), vec![Ast::Ident("g".into())])
        );
        assert!(!s.echo);
        let s = parse_statement("L:ishow(x)$").unwrap();
        assert!(matches!(s.kind, StatementKind::Assignment(ref n, _) if n == "L"));
        let s = parse_statement("apply(defrule,[Maxwell,extdiff(A([a],[]),b),F([a,b],[])])$").unwrap();
        assert!(matches!(s.kind, StatementKind::Command(ref n, ref a) if n == "defrule" && a.len() == 3));
        let s = parse_statement("igeowedge_flag:true$").unwrap();
        assert!(matches!(s.kind, StatementKind::Command(ref n, _) if n == "igeowedge_flag"));
        assert_eq!(parse_statement("quit;").unwrap().kind, StatementKind::Quit);
    }

    #[test]
    fn unknown_command() {
        assert_eq!(
            parse_statement("frobnicate(x);"),
            Err(Error::UnknownCommand("frobnicate".into()))
        );
    }

    #[test]
    fn syntax_error_position() {
        match parse_statement("ishow(x +);") {
            Err(Error::Syntax {
                line: 1, column: 10, ..
            }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_statement("ishow(x)"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn quoted_covdiff_is_inert() {
        let e = parse_expression("'covdiff(F([],[m,n]),n)").unwrap();
        assert!(e.terms[0].factors[0].as_indexed().unwrap().has_covariant_derivs());
    }

    #[test]
    fn powers_freshen_dummies() {
        let e = parse_expression("(x([a],[])*y([],[a]))^2").unwrap();
        e.validate().unwrap();
        assert_eq!(e.terms[0].factors.len(), 4);
    }
}
