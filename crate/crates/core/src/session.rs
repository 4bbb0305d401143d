//! A stateful session: the evaluator behind the script runner and the REPL.
//!
//! Statements are numbered from 1. A `;` statement prints `(%oN) value`;
//! `ishow` prints `(%tN) value` whenever it is evaluated, whatever the
//! terminator. Both kinds of line enter the history, so `%th(k)` counts
//! back over `%t` and `%o` entries alike and `%` is `%th(1)`.
//! Nothing is simplified implicitly: contraction and canonicalization only
//! happen through `contract` and `canform`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::algebra::{canonicalize, contract, expand};
use crate::calculus::{christoffel, covdiff, covdiff_inert, ev_ichr2, extdiff, fdiff, idiff};
use crate::context::{Context, Dimension};
use crate::error::{Error, Result};
use crate::expr::{Expression, Factor, IndexName, Indexed, ICHR2};
use crate::lagrangian::{check_conservation, euler_lagrange};
use crate::parser::{
    self, divide, index_label, indexed_from_call, number, power, product, Ast, Statement, StatementKind,
};
use crate::render::{render, Format};
use crate::rules::{apply1, mapcovdiff, RewriteRule, RuleTable};
use crate::symmetry::{Block, BlockKind, SymmetryDeclaration};

/// One line of a transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Line {
    /// `(%tN) expr`, printed by `ishow`.
    Show { number: usize, expr: Expression },
    /// `(%oN) expr`, the echoed value of a `;` statement.
    Output { number: usize, expr: Expression },
    /// `(%oN) text` for values that are not expressions (`done`, rule names).
    Text { number: usize, text: String },
    /// An intermediate derivation step, emitted in trace mode.
    Trace { label: String, expr: Expression },
}

impl Line {
    pub fn render(&self, format: Format) -> String {
        match (self, format) {
            (line, Format::Json) => serde_json::to_string(line).expect("lines serialize"),
            (Line::Show { number, expr }, f) => format!("(%t{number}) {}", render(expr, f)),
            (Line::Output { number, expr }, f) => format!("(%o{number}) {}", render(expr, f)),
            (Line::Text { number, text }, _) => format!("(%o{number}) {text}"),
            (Line::Trace { label, expr }, f) => format!("  ;; {label}: {}", render(expr, f)),
        }
    }
}

#[derive(Debug, Clone)]
enum Value {
    Expr(Expression),
    Text(String),
}

#[derive(Debug, Clone)]
struct HistoryEntry {
    label: String,
    expr: Expression,
}

#[derive(Debug, Clone, Default)]
pub struct Session {
    pub ctx: Context,
    pub rules: RuleTable,
    vars: BTreeMap<String, Expression>,
    history: Vec<HistoryEntry>,
    arities: BTreeMap<String, usize>,
    statement: usize,
    pending: Vec<Line>,
    /// Emit derivation steps of `eulerlagrange` as trace lines.
    pub trace: bool,
    warnings: Vec<String>,
}

impl Session {
    pub fn new() -> Self {
        Session::default()
    }

    /// Number of the next statement.
    pub fn next_number(&self) -> usize {
        self.statement + 1
    }

    pub fn take_warnings(&mut self) -> Vec<String> {
        std::mem::take(&mut self.warnings)
    }

    pub fn variable(&self, name: &str) -> Option<&Expression> {
        self.vars.get(name)
    }

    /// The value labelled `%tN`/`%oN`, if recorded.
    pub fn labelled(&self, label: &str) -> Option<&Expression> {
        self.history.iter().rev().find(|h| h.label == label).map(|h| &h.expr)
    }

    /// `%th(k)`: the k-th most recent history entry.
    pub fn th(&self, k: usize) -> Result<&Expression> {
        if k == 0 || k > self.history.len() {
            return Err(Error::History(k));
        }
        Ok(&self.history[self.history.len() - k].expr)
    }

    /// Parses and runs `src`, returning the transcript lines.
    pub fn run_str(&mut self, src: &str) -> Result<Vec<Line>> {
        let mut out = Vec::new();
        for stmt in parser::parse_script(src)? {
            out.extend(self.execute(&stmt)?);
        }
        Ok(out)
    }

    /// Parses and evaluates one expression without touching the history.
    pub fn eval_str(&mut self, src: &str) -> Result<Expression> {
        let ast = parser::parse_ast(src)?;
        let e = self.expr(&ast)?;
        self.pending.clear();
        Ok(e)
    }

    /// Executes one statement. On error the statement number is consumed
    /// and the session is otherwise unchanged apart from declarations made
    /// before the failure point.
    pub fn execute(&mut self, stmt: &Statement) -> Result<Vec<Line>> {
        self.statement += 1;
        self.pending.clear();
        let n = self.statement;
        let value = match &stmt.kind {
            StatementKind::Quit => return Ok(Vec::new()),
            StatementKind::Expression(a) => self.eval(a),
            StatementKind::Assignment(name, a) => self.expr(a).map(|e| {
                self.vars.insert(name.clone(), e.clone());
                Value::Expr(e)
            }),
            StatementKind::Command(name, args) => self.command(name, args),
        };
        let value = match value {
            Ok(v) => v,
            Err(e) => {
                self.pending.clear();
                return Err(e);
            }
        };
        let mut lines = std::mem::take(&mut self.pending);
        match value {
            Value::Expr(expr) => {
                self.history.push(HistoryEntry {
                    label: format!("%o{n}"),
                    expr: expr.clone(),
                });
                if stmt.echo {
                    lines.push(Line::Output { number: n, expr });
                }
            }
            Value::Text(text) => {
                if stmt.echo {
                    lines.push(Line::Text { number: n, text });
                }
            }
        }
        Ok(lines)
    }

    // -------------------------------------------------------------- checks

    fn check(&mut self, e: Expression) -> Result<Expression> {
        e.validate()?;
        e.free_indices()?;
        fn walk(f: &Factor, out: &mut Vec<(String, usize)>) {
            match f {
                Factor::Indexed(t) => out.push((t.name.clone(), t.rank())),
                Factor::Wrapped(w) => w.body.iter().for_each(|b| walk(b, out)),
            }
        }
        let mut ranks = Vec::new();
        e.terms
            .iter()
            .flat_map(|t| &t.factors)
            .for_each(|f| walk(f, &mut ranks));
        for (name, rank) in ranks {
            let expected = *self.arities.entry(name.clone()).or_insert(rank);
            if expected != rank {
                return Err(Error::ArityMismatch {
                    name,
                    expected,
                    found: rank,
                });
            }
        }
        Ok(e)
    }

    // ---------------------------------------------------------- evaluation

    fn expr(&mut self, a: &Ast) -> Result<Expression> {
        match self.eval(a)? {
            Value::Expr(e) => Ok(e),
            Value::Text(t) => Err(Error::NotAnExpression(t)),
        }
    }

    fn eval(&mut self, a: &Ast) -> Result<Value> {
        let e = match a {
            Ast::Number(n) => number(n),
            Ast::Ident(name) => return self.ident(name),
            Ast::List(_) => return Err(Error::NotAnExpression("a list".into())),
            Ast::Neg(x) => self.expr(x)?.neg(),
            Ast::Add(x, y) => self.expr(x)?.add(&self.expr(y)?),
            Ast::Sub(x, y) | Ast::Equation(x, y) => self.expr(x)?.sub(&self.expr(y)?),
            Ast::Mul(x, y) => product(&self.expr(x)?, &self.expr(y)?)?,
            Ast::Div(x, y) => divide(&self.expr(x)?, &self.expr(y)?)?,
            Ast::Pow(x, k) => power(&self.expr(x)?, k)?,
            Ast::Call { name, args, quoted } => return self.call(name, args, *quoted),
        };
        Ok(Value::Expr(self.check(e)?))
    }

    fn ident(&mut self, name: &str) -> Result<Value> {
        if name == "%" {
            return Ok(Value::Expr(self.th(1)?.clone()));
        }
        if let Some(e) = self.vars.get(name) {
            return Ok(Value::Expr(e.clone()));
        }
        if name.starts_with("%o") || name.starts_with("%t") {
            return self
                .labelled(name)
                .cloned()
                .map(Value::Expr)
                .ok_or_else(|| Error::NotAnExpression(format!("{name} (no such output)")));
        }
        if name == "done" || name == "true" || name == "false" {
            return Ok(Value::Text(name.to_string()));
        }
        let e = Expression::factor(Indexed::scalar(name));
        Ok(Value::Expr(self.check(expand(&e, &self.ctx)?)?))
    }

    fn arity(name: &str, args: &[Ast], allowed: std::ops::RangeInclusive<usize>) -> Result<()> {
        if allowed.contains(&args.len()) {
            Ok(())
        } else {
            Err(Error::Unsupported(format!(
                "{name} takes {allowed:?} arguments, got {}",
                args.len()
            )))
        }
    }

    fn index(a: &Ast) -> Result<IndexName> {
        index_label(a)
    }

    fn target(a: &Ast) -> Result<Indexed> {
        match a {
            Ast::Call { name, args, .. } if matches!(args.first(), Some(Ast::List(_))) => indexed_from_call(name, args),
            Ast::Ident(name) => Ok(Indexed::scalar(name.as_str())),
            other => Err(Error::NotAnExpression(format!("{other:?} is not an indexed object"))),
        }
    }

    fn rule_list(&self, args: &[Ast]) -> Result<Vec<RewriteRule>> {
        args.iter()
            .map(|a| match a {
                Ast::Ident(n) => self.rules.get(n).cloned(),
                other => Err(Error::UnknownRule(format!("{other:?}"))),
            })
            .collect()
    }

    fn call(&mut self, name: &str, args: &[Ast], quoted: bool) -> Result<Value> {
        if matches!(args.first(), Some(Ast::List(_))) && !parser::is_known_function(name) {
            let t = indexed_from_call(name, args)?;
            let e = expand(&Expression::factor(t), &self.ctx)?;
            return Ok(Value::Expr(self.check(e)?));
        }
        if parser::COMMANDS.contains(&name) && !is_pure_command(name) {
            return self.command(name, args);
        }
        let e = match name {
            "covdiff" if quoted => {
                Self::arity(name, args, 2..=usize::MAX)?;
                let mut acc = self.expr(&args[0])?;
                for i in &args[1..] {
                    acc = covdiff_inert(&acc, &Self::index(i)?, &self.ctx);
                }
                acc
            }
            _ if quoted => return Err(Error::Unsupported(format!("quoted {name}"))),
            "ishow" => {
                Self::arity(name, args, 1..=1)?;
                let e = self.expr(&args[0])?;
                let n = self.statement;
                self.history.push(HistoryEntry {
                    label: format!("%t{n}"),
                    expr: e.clone(),
                });
                self.pending.push(Line::Show {
                    number: n,
                    expr: e.clone(),
                });
                e
            }
            "canform" => {
                Self::arity(name, args, 1..=1)?;
                canonicalize(&self.expr(&args[0])?, &self.ctx)?
            }
            "contract" => {
                Self::arity(name, args, 1..=1)?;
                contract(&self.expr(&args[0])?, &self.ctx)
            }
            "expand" => {
                Self::arity(name, args, 1..=1)?;
                expand(&self.expr(&args[0])?, &self.ctx)?
            }
            "rename" => {
                Self::arity(name, args, 1..=1)?;
                self.expr(&args[0])?.rename_dummies()
            }
            "lhs" => {
                Self::arity(name, args, 1..=1)?;
                self.expr(&args[0])?
            }
            "%th" => {
                Self::arity(name, args, 1..=1)?;
                let k = match &args[0] {
                    Ast::Number(k) => k.to_usize().unwrap_or(0),
                    _ => 0,
                };
                self.th(k)?.clone()
            }
            "diff" => {
                Self::arity(name, args, 2..=2)?;
                let e = self.expr(&args[0])?;
                fdiff(&e, &Self::target(&args[1])?, &self.ctx)?
            }
            "idiff" | "covdiff" => {
                Self::arity(name, args, 2..=usize::MAX)?;
                let mut acc = self.expr(&args[0])?;
                for i in &args[1..] {
                    let i = Self::index(i)?;
                    acc = if name == "idiff" {
                        idiff(&acc, &i, &self.ctx)
                    } else {
                        covdiff(&acc, &i, &self.ctx)?
                    };
                }
                acc
            }
            "extdiff" => {
                Self::arity(name, args, 2..=2)?;
                let e = self.expr(&args[0])?;
                extdiff(&e, &Self::index(&args[1])?, &self.ctx)?
            }
            "christoffel" => {
                Self::arity(name, args, 3..=3)?;
                christoffel(
                    &Self::index(&args[0])?,
                    &Self::index(&args[1])?,
                    &Self::index(&args[2])?,
                    &self.ctx,
                )?
            }
            "ev" => {
                Self::arity(name, args, 2..=2)?;
                if args[1].as_ident() != Some(ICHR2) {
                    return Err(Error::Unsupported("ev(e, ichr2) is the only supported form".into()));
                }
                ev_ichr2(&self.expr(&args[0])?, &self.ctx)?
            }
            "apply1" => {
                Self::arity(name, args, 2..=usize::MAX)?;
                let e = self.expr(&args[0])?;
                let rules = self.rule_list(&args[1..])?;
                let refs: Vec<&RewriteRule> = rules.iter().collect();
                apply1(&e, &refs, &self.ctx)?
            }
            "mapcovdiff" => {
                Self::arity(name, args, 2..=2)?;
                let e = self.expr(&args[0])?;
                mapcovdiff(&e, &Self::index(&args[1])?, &self.ctx)
            }
            "map" => {
                Self::arity(name, args, 2..=2)?;
                let index = lambda_covdiff_index(&args[0])?;
                let e = self.expr(&args[1])?;
                mapcovdiff(&e, &index, &self.ctx)
            }
            "eulerlagrange" => {
                Self::arity(name, args, 2..=usize::MAX)?;
                let l = self.expr(&args[0])?;
                let field = Self::target(&args[1])?;
                let rules = self.rule_list(&args[2..])?;
                let refs: Vec<&RewriteRule> = rules.iter().collect();
                let eq = euler_lagrange(&l, &field, &refs, &self.ctx)?;
                if self.trace {
                    self.pending.extend(eq.trace.iter().map(|s| Line::Trace {
                        label: s.label.clone(),
                        expr: s.expr.clone(),
                    }));
                }
                eq.equation
            }
            "conservation" => {
                Self::arity(name, args, 2..=usize::MAX)?;
                let e = self.expr(&args[0])?;
                let rules = self.rule_list(&args[2..])?;
                let refs: Vec<&RewriteRule> = rules.iter().collect();
                check_conservation(&e, &Self::index(&args[1])?, &refs, &self.ctx)?
            }
            other => return Err(Error::UnknownCommand(other.to_string())),
        };
        Ok(Value::Expr(self.check(e)?))
    }

    // ------------------------------------------------------------ commands

    fn command(&mut self, name: &str, args: &[Ast]) -> Result<Value> {
        if is_pure_command(name) {
            return self.call(name, args, false);
        }
        match name {
            "load" => {}
            "imetric" => {
                Self::arity(name, args, 1..=1)?;
                let g = ident_arg(&args[0])?;
                self.ctx.set_metric(g)?;
            }
            "idim" => {
                Self::arity(name, args, 1..=1)?;
                let dim = match &args[0] {
                    Ast::Number(n) => Dimension::Fixed(
                        n.to_u32()
                            .filter(|&n| n > 0)
                            .ok_or_else(|| Error::Unsupported("dimension must be a positive integer".into()))?,
                    ),
                    Ast::Ident(s) if s == "dim" => Dimension::Symbolic,
                    _ => return Err(Error::Unsupported("idim takes a positive integer".into())),
                };
                self.ctx.set_dimension(dim);
            }
            "igeowedge_flag" => {
                Self::arity(name, args, 1..=1)?;
                self.ctx.geowedge = match args[0].as_ident() {
                    Some("true") => true,
                    Some("false") => false,
                    _ => return Err(Error::Unsupported("igeowedge_flag takes true or false".into())),
                };
            }
            "decsym" => self.decsym(args)?,
            "components" => {
                Self::arity(name, args, 2..=2)?;
                let lhs = Self::target(&args[0])?;
                let rhs = self.expr(&args[1])?;
                self.ctx.components.define(lhs, rhs)?;
            }
            "remcomps" => {
                Self::arity(name, args, 1..=1)?;
                let t = match &args[0] {
                    Ast::Ident(n) => n.clone(),
                    other => Self::target(other)?.name,
                };
                self.ctx.components.remove(&t);
            }
            "matchdeclare" => {
                if args.is_empty() || !args.len().is_multiple_of(2) {
                    return Err(Error::Unsupported("matchdeclare takes label/predicate pairs".into()));
                }
                for pair in args.chunks(2) {
                    let pred = ident_arg(&pair[1])?;
                    let labels = match &pair[0] {
                        Ast::List(items) => items.iter().map(index_label).collect::<Result<Vec<_>>>()?,
                        other => vec![index_label(other)?],
                    };
                    for l in labels {
                        self.rules.matchdeclare(l, pred)?;
                    }
                }
            }
            "defrule" => {
                Self::arity(name, args, 3..=3)?;
                let rule = ident_arg(&args[0])?.to_string();
                let pattern = self.expr(&args[1])?;
                let replacement = self.expr(&args[2])?;
                self.rules.defrule(&rule, pattern, replacement)?;
                return Ok(Value::Text(rule));
            }
            other => return Err(Error::UnknownCommand(other.to_string())),
        }
        Ok(Value::Text("done".into()))
    }

    fn decsym(&mut self, args: &[Ast]) -> Result<()> {
        Self::arity("decsym", args, 5..=5)?;
        let name = ident_arg(&args[0])?.to_string();
        let count = |a: &Ast| match a {
            Ast::Number(n) => n.to_usize().ok_or_else(|| Error::InvalidSymmetry("arity".into())),
            _ => Err(Error::InvalidSymmetry("arity must be an integer".into())),
        };
        let (cov, contra) = (count(&args[1])?, count(&args[2])?);
        let cov_blocks = blocks(&args[3], cov)?;
        let contra_blocks = blocks(&args[4], contra)?;
        if let Some(&rank) = self.arities.get(&name) {
            if rank != cov + contra {
                return Err(Error::ArityMismatch {
                    name,
                    expected: rank,
                    found: cov + contra,
                });
            }
        }
        if cov == 0 || contra == 0 {
            self.warnings.push(format!(
                "decsym({name},{cov},{contra},...) also applies to {name} with {contra} covariant and {cov} contravariant indices"
            ));
        }
        self.arities.insert(name.clone(), cov + contra);
        self.ctx
            .symmetries
            .declare(SymmetryDeclaration::new(name, cov, contra, cov_blocks, contra_blocks)?)
    }
}

/// Commands that only compute a value (they can also appear nested).
fn is_pure_command(name: &str) -> bool {
    matches!(
        name,
        "ishow" | "canform" | "contract" | "expand" | "diff" | "idiff" | "covdiff" | "extdiff" | "apply1"
    )
}

fn ident_arg(a: &Ast) -> Result<&str> {
    a.as_ident()
        .ok_or_else(|| Error::Unsupported(format!("expected a name, found {a:?}")))
}

/// `[anti(all)]`, `[sym(1,2), anti(3,4)]`: 1-based positions.
fn blocks(a: &Ast, arity: usize) -> Result<Vec<Block>> {
    let Ast::List(items) = a else {
        return Err(Error::InvalidSymmetry("expected a list of sym(...)/anti(...)".into()));
    };
    items
        .iter()
        .map(|item| {
            let Ast::Call { name, args, .. } = item else {
                return Err(Error::InvalidSymmetry(format!("{item:?}")));
            };
            let kind = match name.as_str() {
                "sym" => BlockKind::Sym,
                "anti" => BlockKind::Anti,
                other => return Err(Error::InvalidSymmetry(format!("unknown block {other}"))),
            };
            if let [Ast::Ident(all)] = args.as_slice() {
                if all == "all" {
                    return Ok(Block::all(kind, arity));
                }
            }
            let positions = args
                .iter()
                .map(|p| match p {
                    Ast::Number(n) => n
                        .to_usize()
                        .filter(|&k| k >= 1)
                        .map(|k| k - 1)
                        .ok_or_else(|| Error::InvalidSymmetry("positions are 1-based".into())),
                    other => Err(Error::InvalidSymmetry(format!("{other:?}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Block { kind, positions })
        })
        .collect()
}

/// Recognizes `lambda([x], 'covdiff(x, m))` and returns `m`.
fn lambda_covdiff_index(a: &Ast) -> Result<IndexName> {
    let unsupported = || Error::Unsupported("map only supports lambda([x], 'covdiff(x, i))".into());
    let Ast::Call { name, args, .. } = a else {
        return Err(unsupported());
    };
    if name != "lambda" || args.len() != 2 {
        return Err(unsupported());
    }
    let var = match &args[0] {
        Ast::List(v) if v.len() == 1 => v[0].as_ident().ok_or_else(unsupported)?,
        _ => return Err(unsupported()),
    };
    match &args[1] {
        Ast::Call { name, args, .. } if name == "covdiff" && args.len() == 2 && args[0].as_ident() == Some(var) => {
            index_label(&args[1])
        }
        _ => Err(unsupported()),
    }
}

// ------------------------------------------------------------------ runner

/// Outcome of running a whole script.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptOutcome {
    /// Transcript lines, rendered.
    pub transcript: Vec<String>,
    /// Warnings and the diagnostic of a failing statement.
    pub diagnostics: Vec<String>,
    /// 0 success, 1 parse error, 2 evaluation error.
    pub status: i32,
}

/// Runs a script in `session`: the whole text is parsed first, then the
/// statements run in order until the first failure.
pub fn run_script(session: &mut Session, src: &str, format: Format) -> ScriptOutcome {
    let mut out = ScriptOutcome {
        transcript: Vec::new(),
        diagnostics: Vec::new(),
        status: 0,
    };
    let statements = match parser::parse_script(src) {
        Ok(s) => s,
        Err(e) => {
            out.diagnostics.push(format!("parse error: {e}"));
            out.status = 1;
            return out;
        }
    };
    for stmt in statements {
        if stmt.kind == StatementKind::Quit {
            break;
        }
        let number = session.next_number();
        let result = session.execute(&stmt);
        out.diagnostics
            .extend(session.take_warnings().into_iter().map(|w| format!("warning: {w}")));
        match result {
            Ok(lines) => out.transcript.extend(lines.iter().map(|l| l.render(format))),
            Err(e) => {
                out.diagnostics
                    .push(format!("error in statement {number} (line {}): {e}", stmt.line));
                out.status = 2;
                return out;
            }
        }
    }
    out
}

/// Interactive loop: prompts `(%iN) `, reads until a statement terminator,
/// prints results, and keeps going after errors. `quit;` or end of input
/// stops the loop.
pub fn repl<R: BufRead, W: Write>(
    session: &mut Session,
    input: R,
    output: &mut W,
    format: Format,
) -> std::io::Result<()> {
    let mut buffer = String::new();
    let mut lines = input.lines();
    loop {
        if buffer.trim().is_empty() {
            write!(output, "(%i{}) ", session.next_number())?;
            output.flush()?;
        }
        let Some(line) = lines.next() else {
            writeln!(output)?;
            return Ok(());
        };
        buffer.push_str(&line?);
        buffer.push('\n');
        if !ends_statement(&buffer) {
            continue;
        }
        let src = std::mem::take(&mut buffer);
        let statements = match parser::parse_script(&src) {
            Ok(s) => s,
            Err(e) => {
                writeln!(output, "parse error: {e}")?;
                continue;
            }
        };
        for stmt in statements {
            if stmt.kind == StatementKind::Quit {
                return Ok(());
            }
            let result = session.execute(&stmt);
            for w in session.take_warnings() {
                writeln!(output, "warning: {w}")?;
            }
            match result {
                Ok(ls) => {
                    for l in ls {
                        writeln!(output, "{}", l.render(format))?;
                    }
                }
                Err(e) => writeln!(output, "error: {e}")?,
            }
        }
    }
}

/// Whether the buffer ends with a statement terminator outside comments.
fn ends_statement(buffer: &str) -> bool {
    let mut in_comment = false;
    let mut last = None;
    let chars: Vec<char> = buffer.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if !in_comment && chars[i] == '/' && chars.get(i + 1) == Some(&'*') {
            in_comment = true;
            i += 2;
            continue;
        }
        if in_comment && chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
            in_comment = false;
            i += 2;
            continue;
        }
        if !in_comment && !chars[i].is_whitespace() {
            last = Some(chars[i]);
        }
        i += 1;
    }
    !in_comment && matches!(last, Some(';' | '$'))
}

impl Session {
    /// Labels of all history entries, oldest first.
    pub fn history_labels(&self) -> Vec<String> {
        self.history.iter().map(|h| h.label.clone()).collect()
    }

    /// Names of tensors whose rank has been fixed by use or declaration.
    pub fn known_tensors(&self) -> BTreeSet<String> {
        self.arities.keys().cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_display;

    fn run(src: &str) -> (Session, Vec<String>) {
        let mut s = Session::new();
        let lines = s.run_str(src).unwrap();
        (s, lines.iter().map(|l| l.render(Format::Plain)).collect())
    }

    #[test]
    fn echo_and_silence() {
        let (_, lines) = run("x([a],[])*y([],[a]);\nx([a],[])$\n");
        assert_eq!(lines, vec!["(%o1) x_{a} y^{a}"]);
    }

    #[test]
    fn ishow_numbers_and_history() {
        let (s, lines) = run("ishow(F([a,b],[]))$ ishow(G([a],[]));");
        assert_eq!(lines, vec!["(%t1) F_{a b}", "(%t2) G_{a}", "(%o2) G_{a}"]);
        assert_eq!(s.history_labels(), vec!["%t1", "%o1", "%t2", "%o2"]);
    }

    #[test]
    fn th_counts_both_kinds() {
        let (mut s, _) = run("ishow(u([a],[]))$ ishow(v([a],[]))$");
        assert_eq!(s.eval_str("%th(2)").unwrap(), parse_display("v_{a}").unwrap());
        assert_eq!(s.eval_str("%").unwrap(), parse_display("v_{a}").unwrap());
        assert_eq!(s.eval_str("%th(4)").unwrap(), parse_display("u_{a}").unwrap());
        assert_eq!(s.eval_str("%th(5)"), Err(Error::History(5)));
    }

    #[test]
    fn no_implicit_contraction() {
        let (_, lines) = run("imetric(g)$ ishow(g([],[a,b])*x([b],[]))$ contract(g([],[a,b])*x([b],[]));");
        assert_eq!(lines, vec!["(%t2) g^{a b} x_{b}", "(%o3) x^{a}"]);
    }

    #[test]
    fn components_substitute_on_evaluation() {
        let (s, _) = run("components(F([m,n],[]),extdiff(A([m],[]),n))$ L:F([a,b],[])$ remcomps(F)$ M:F([a,b],[])$");
        assert_eq!(s.variable("L").unwrap().to_string(), "A_{b,a} - A_{a,b}");
        assert_eq!(s.variable("M").unwrap().to_string(), "F_{a b}");
    }

    #[test]
    fn decsym_then_canform() {
        let (_, lines) = run("decsym(A,2,0,[anti(all)],[])$ canform(A([b,a],[]));");
        assert_eq!(lines, vec!["(%o2) -A_{a b}"]);
    }

    #[test]
    fn errors_keep_session_alive() {
        let mut s = Session::new();
        let stmt = parser::parse_statement("x([a],[])*y([a],[]);").unwrap();
        assert!(matches!(s.execute(&stmt), Err(Error::VarianceClash(_))));
        let lines = s.run_str("x([a],[]);").unwrap();
        assert_eq!(lines[0].render(Format::Plain), "(%o2) x_{a}");
    }

    #[test]
    fn arity_is_fixed_per_name() {
        let mut s = Session::new();
        s.run_str("T([a],[]);").unwrap();
        assert!(matches!(s.run_str("T([a,b],[]);"), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn runner_exit_codes() {
        let mut s = Session::new();
        assert_eq!(run_script(&mut s, "", Format::Plain).status, 0);
        let bad = run_script(&mut Session::new(), "ishow(x +);", Format::Plain);
        assert_eq!(bad.status, 1);
        let triple = run_script(&mut Session::new(), "x([a],[])*y([],[a])*z([a],[]);", Format::Plain);
        assert_eq!(triple.status, 2);
        assert!(
            triple.diagnostics[0].contains("three or more"),
            "{:?}",
            triple.diagnostics
        );
    }

    #[test]
    fn repl_prompts_and_recovers() {
        let mut s = Session::new();
        let input = b"imetric(g)$\nfrobnicate(x);\nx([a],\n[]);\n%;\nquit;\n";
        let mut out = Vec::new();
        repl(&mut s, &input[..], &mut out, Format::Plain).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("(%i1) "));
        assert!(text.contains("unknown command or function `frobnicate`"));
        assert!(text.contains("(%o2) x_{a}"));
        assert!(text.contains("(%o3) x_{a}"));
    }

    #[test]
    fn map_lambda_is_mapcovdiff() {
        let (s, _) = run("E:map(lambda([x],'covdiff(x,m)),j([],[m])+K([],[m]))$");
        assert_eq!(s.variable("E").unwrap().to_string(), "j^{m}_{;m} + K^{m}_{;m}");
    }
}
