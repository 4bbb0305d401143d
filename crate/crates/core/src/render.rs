//! Output formats. `plain` is what `ishow` prints and what
//! [`parse_display`](crate::parser::parse_display) reads back; `script`
//! re-enters the script parser; `latex` and `json` are for export.

use std::fmt;
use std::str::FromStr;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{split_sign, DerivKind, DerivSlot, Expression, Factor, IndexName, Indexed, Rational, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Plain,
    Latex,
    Json,
    Script,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Format::Plain),
            "latex" => Ok(Format::Latex),
            "json" => Ok(Format::Json),
            "script" => Ok(Format::Script),
            other => Err(Error::Unsupported(format!("output format `{other}`"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Plain => "plain",
            Format::Latex => "latex",
            Format::Json => "json",
            Format::Script => "script",
        })
    }
}

pub fn render(expr: &Expression, format: Format) -> String {
    match format {
        Format::Plain => render_plain(expr),
        Format::Latex => render_latex(expr),
        Format::Json => serde_json::to_string(expr).expect("expressions serialize"),
        Format::Script => render_script(expr),
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_plain(self))
    }
}

/// Joins rendered terms with ` + ` / ` - `, the first sign attached.
fn join_terms(expr: &Expression, mut term: impl FnMut(&Rational, &[Factor]) -> String) -> String {
    if expr.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, t) in expr.terms.iter().enumerate() {
        let (negative, magnitude) = split_sign(&t.coeff);
        match (k, negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&term(&magnitude, &t.factors));
    }
    out
}

/// Groups derivative slots into `,`/`;`-introduced runs.
fn deriv_runs(derivs: &[DerivSlot], sep: &str) -> String {
    let mut out = String::new();
    let mut current = None;
    for d in derivs {
        if current != Some(d.kind) {
            out.push(if d.kind == DerivKind::Ordinary { ',' } else { ';' });
            current = Some(d.kind);
        } else {
            out.push_str(sep);
        }
        out.push_str(d.index.as_str());
    }
    out
}

fn labels(ls: &[IndexName], sep: &str) -> String {
    ls.iter().map(IndexName::as_str).collect::<Vec<_>>().join(sep)
}

// ---------------------------------------------------------------- plain

fn plain_indexed(t: &Indexed) -> String {
    let mut s = t.name.clone();
    let upper = |s: &mut String| {
        if !t.contra.is_empty() {
            s.push_str(&format!("^{{{}}}", labels(&t.contra, " ")));
        }
    };
    if t.cov.is_empty() {
        upper(&mut s);
        if !t.derivs.is_empty() {
            s.push_str(&format!("_{{{}}}", deriv_runs(&t.derivs, " ")));
        }
    } else {
        s.push_str(&format!("_{{{}{}}}", labels(&t.cov, " "), deriv_runs(&t.derivs, " ")));
        upper(&mut s);
    }
    s
}

fn plain_factor(f: &Factor) -> String {
    match f {
        Factor::Indexed(t) => plain_indexed(t),
        Factor::Wrapped(w) => {
            let body: Vec<String> = w.body.iter().map(plain_factor).collect();
            format!("({})_{{{}}}", body.join(" "), deriv_runs(&w.derivs, " "))
        }
    }
}

pub fn render_plain(expr: &Expression) -> String {
    join_terms(expr, |c, factors| {
        let mut parts = Vec::new();
        if !c.is_one() || factors.is_empty() {
            parts.push(c.to_string());
        }
        parts.extend(factors.iter().map(plain_factor));
        parts.join(" ")
    })
}

// ---------------------------------------------------------------- latex

const GREEK: &[&str] = &[
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota", "kappa", "lambda", "mu", "nu", "xi",
    "pi", "rho", "sigma", "tau", "upsilon", "phi", "chi", "psi", "omega", "Gamma", "Delta", "Theta", "Lambda", "Xi",
    "Pi", "Sigma", "Phi", "Psi", "Omega",
];

fn latex_name(name: &str) -> String {
    match name {
        "kdelta" => r"\delta".into(),
        "ichr2" => r"\Gamma".into(),
        "dim" => r"\mathrm{dim}".into(),
        n if GREEK.contains(&n) => format!(r"\{n}"),
        n if n.chars().count() == 1 => n.into(),
        n => format!(r"\mathrm{{{}}}", n.replace('_', r"\_")),
    }
}

fn latex_label(i: &IndexName) -> String {
    match i.generated_number() {
        Some(n) => format!(r"\%{n}"),
        None if GREEK.contains(&i.as_str()) => format!(r"\{}", i.as_str()),
        None => i.as_str().into(),
    }
}

fn latex_labels(ls: &[IndexName]) -> String {
    ls.iter().map(latex_label).collect::<Vec<_>>().join(" ")
}

fn latex_derivs(derivs: &[DerivSlot]) -> String {
    let relabeled: Vec<DerivSlot> = derivs
        .iter()
        .map(|d| DerivSlot {
            index: IndexName::new(latex_label(&d.index)),
            kind: d.kind,
        })
        .collect();
    deriv_runs(&relabeled, " ")
}

fn latex_factor(f: &Factor) -> String {
    match f {
        Factor::Indexed(t) => {
            let mut s = latex_name(&t.name);
            let lower = format!("{}{}", latex_labels(&t.cov), latex_derivs(&t.derivs));
            if !t.contra.is_empty() {
                s.push_str(&format!("^{{{}}}", latex_labels(&t.contra)));
            }
            if !lower.is_empty() {
                // Keep lower slots visibly after the upper ones.
                if !t.contra.is_empty() && !t.cov.is_empty() {
                    s.push_str("{}");
                }
                s.push_str(&format!("_{{{lower}}}"));
            }
            s
        }
        Factor::Wrapped(w) => {
            let body: Vec<String> = w.body.iter().map(latex_factor).collect();
            format!(r"\left({}\right)_{{{}}}", body.join(r"\, "), latex_derivs(&w.derivs))
        }
    }
}

fn latex_coeff(c: &Rational) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!(r"\frac{{{}}}{{{}}}", c.numer(), c.denom())
    }
}

pub fn render_latex(expr: &Expression) -> String {
    join_terms(expr, |c, factors| {
        let body: Vec<String> = factors.iter().map(latex_factor).collect();
        match (c.is_one(), body.is_empty()) {
            (_, true) => latex_coeff(c),
            (true, false) => body.join(r"\, "),
            (false, false) => format!(r"{} {}", latex_coeff(c), body.join(r"\, ")),
        }
    })
}

// ---------------------------------------------------------------- script

fn script_wrap(mut inner: String, derivs: &[DerivSlot]) -> String {
    let mut k = 0;
    while k < derivs.len() {
        let kind = derivs[k].kind;
        let mut run = vec![derivs[k].index.as_str()];
        while k + run.len() < derivs.len() && derivs[k + run.len()].kind == kind {
            run.push(derivs[k + run.len()].index.as_str());
        }
        k += run.len();
        let op = if kind == DerivKind::Ordinary {
            "idiff"
        } else {
            "'covdiff"
        };
        inner = format!("{op}({inner},{})", run.join(","));
    }
    inner
}

fn script_factor(f: &Factor) -> String {
    match f {
        Factor::Indexed(t) => {
            // Leading ordinary derivatives go inline as trailing arguments.
            let lead = t.derivs.iter().take_while(|d| d.kind == DerivKind::Ordinary).count();
            let mut args = vec![
                format!("[{}]", labels(&t.cov, ",")),
                format!("[{}]", labels(&t.contra, ",")),
            ];
            args.extend(t.derivs[..lead].iter().map(|d| d.index.as_str().to_string()));
            script_wrap(format!("{}({})", t.name, args.join(",")), &t.derivs[lead..])
        }
        Factor::Wrapped(w) => {
            let body: Vec<String> = w.body.iter().map(script_factor).collect();
            script_wrap(body.join("*"), &w.derivs)
        }
    }
}

pub fn render_script(expr: &Expression) -> String {
    join_terms(expr, |c, factors| {
        let mut parts = Vec::new();
        if !c.is_one() || factors.is_empty() {
            parts.push(c.to_string());
        }
        parts.extend(factors.iter().map(script_factor));
        parts.join("*")
    })
}

/// Renders one term on its own, sign included.
pub fn render_term(t: &Term, format: Format) -> String {
    render(&Expression::from_terms(vec![t.clone()]), format)
}
