//! Reader for the plain display notation produced by `ishow`, so printed
//! results can be read back: `-1/4 F_{a b} F^{a b} + j_{k} A^{k}`,
//! `F^{m n}_{;n}`, `(g^{a b} phi_{,b})_{;a}`.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::expr::{DerivKind, DerivSlot, Expression, Factor, IndexName, Indexed, Rational, Term, Wrapped};

struct Reader<'a> {
    chars: Vec<char>,
    pos: usize,
    src: &'a str,
}

impl Reader<'_> {
    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            line: 1,
            column: self.pos + 1,
            message: format!("{message} in `{}`", self.src),
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn integer(&mut self) -> Option<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.chars[start..self.pos].iter().collect::<String>().parse().unwrap())
    }

    fn name(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        let first = *self.chars.get(self.pos)?;
        if !(first.is_alphabetic() || first == '%') {
            return None;
        }
        self.pos += 1;
        while let Some(&c) = self.chars.get(self.pos) {
            let underscore_name = c == '_' && self.chars.get(self.pos + 1) != Some(&'{');
            if c.is_alphanumeric() || underscore_name {
                self.pos += 1;
            } else {
                break;
            }
        }
        Some(self.chars[start..self.pos].iter().collect())
    }

    fn labels_until(&mut self, stops: &[char]) -> Result<Vec<IndexName>> {
        let mut out = Vec::new();
        while !self.peek().is_some_and(|c| stops.contains(&c)) {
            match self.name() {
                Some(n) => out.push(IndexName::new(n)),
                None => return Err(self.error("expected an index")),
            }
        }
        Ok(out)
    }

    /// Body of `_{...}`: lower indices, then `,`/`;`-introduced derivative runs.
    fn subscript(&mut self) -> Result<(Vec<IndexName>, Vec<DerivSlot>)> {
        self.expect('{')?;
        let cov = self.labels_until(&[',', ';', '}'])?;
        let mut derivs = Vec::new();
        loop {
            let kind = if self.eat(',') {
                DerivKind::Ordinary
            } else if self.eat(';') {
                DerivKind::Covariant
            } else {
                break;
            };
            for index in self.labels_until(&[',', ';', '}'])? {
                derivs.push(DerivSlot { index, kind });
            }
        }
        self.expect('}')?;
        Ok((cov, derivs))
    }

    fn indices(&mut self, name: String) -> Result<Indexed> {
        let mut t = Indexed::scalar(name);
        loop {
            // `_` belongs to the name unless it opens a brace; `name` already
            // stopped in front of it.
            if self.eat('_') {
                let (cov, derivs) = self.subscript()?;
                t.cov.extend(cov);
                t.derivs.extend(derivs);
            } else if self.eat('^') {
                self.expect('{')?;
                t.contra.extend(self.labels_until(&['}'])?);
                self.expect('}')?;
            } else {
                return Ok(t);
            }
        }
    }

    fn factor(&mut self) -> Result<Option<Factor>> {
        if self.eat('(') {
            let mut body = Vec::new();
            while let Some(f) = self.factor()? {
                body.push(f);
            }
            self.expect(')')?;
            self.expect('_')?;
            let (cov, derivs) = self.subscript()?;
            if !cov.is_empty() || derivs.is_empty() {
                return Err(self.error("a parenthesised product takes only derivative indices"));
            }
            return Ok(Some(Factor::Wrapped(Wrapped { body, derivs })));
        }
        match self.name() {
            Some(n) => Ok(Some(Factor::Indexed(self.indices(n)?))),
            None => Ok(None),
        }
    }

    fn term(&mut self, negative: bool) -> Result<Term> {
        let mut coeff = Rational::from_integer(1.into());
        if let Some(n) = self.integer() {
            let d = if self.eat('/') {
                self.integer().ok_or_else(|| self.error("expected a denominator"))?
            } else {
                BigInt::from(1)
            };
            coeff = Rational::new(n, d);
        }
        let mut factors = Vec::new();
        while let Some(f) = self.factor()? {
            factors.push(f);
        }
        if negative {
            coeff = -coeff;
        }
        Ok(Term::new(coeff, factors))
    }
}

/// Parses plain display notation back into an expression.
pub fn parse_display(src: &str) -> Result<Expression> {
    let mut r = Reader {
        chars: src.chars().collect(),
        pos: 0,
        src,
    };
    if r.peek().is_none() {
        return Err(r.error("empty input"));
    }
    let mut terms = Vec::new();
    let mut negative = r.eat('-');
    loop {
        let t = r.term(negative)?;
        if !(t.coeff == Rational::from_integer(0.into())) || !t.factors.is_empty() {
            terms.push(t);
        }
        if r.eat('+') {
            negative = false;
        } else if r.eat('-') {
            negative = true;
        } else {
            break;
        }
    }
    if r.peek().is_some() {
        return Err(r.error("unexpected input"));
    }
    Ok(Expression::from_terms(terms))
}
