use num_bigint::BigInt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Colon,
    Equals,
    Quote,
    /// `;` (echo) or `$` (silent).
    Terminator {
        echo: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '%'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

pub fn tokenize(src: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let syntax = |line, column, message: &str| Error::Syntax {
        line,
        column,
        message: message.to_string(),
    };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut bump = |n: usize, i: &mut usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            bump(1, &mut i);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let mut j = i + 2;
            while j + 1 < chars.len() && !(chars[j] == '*' && chars[j + 1] == '/') {
                j += 1;
            }
            if j + 1 >= chars.len() {
                return Err(syntax(l0, c0, "unterminated comment"));
            }
            bump(j + 2 - i, &mut i);
            continue;
        }
        let tok = if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let digits: String = chars[i..j].iter().collect();
            let n = digits.parse().expect("digits");
            bump(j - i, &mut i);
            Tok::Int(n)
        } else if is_ident_start(c) {
            let mut j = i + 1;
            while j < chars.len() && is_ident_continue(chars[j]) {
                j += 1;
            }
            let name: String = chars[i..j].iter().collect();
            bump(j - i, &mut i);
            Tok::Ident(name)
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                ':' => Tok::Colon,
                '=' => Tok::Equals,
                '\'' => Tok::Quote,
                ';' => Tok::Terminator { echo: true },
                '$' => Tok::Terminator { echo: false },
                other => return Err(syntax(l0, c0, &format!("unexpected character `{other}`"))),
            };
            bump(1, &mut i);
            t
        };
        out.push(Spanned {
            tok,
            line: l0,
            column: c0,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_positions() {
        let t = tokenize("imetric(g)$\n/* note */ %th(2);").unwrap();
        assert_eq!(t[0].tok, Tok::Ident("imetric".into()));
        assert_eq!(t[4].tok, Tok::Terminator { echo: false });
        assert_eq!(t[5].tok, Tok::Ident("%th".into()));
        assert_eq!((t[5].line, t[5].column), (2, 12));
    }

    #[test]
    fn bad_character() {
        assert!(matches!(
            tokenize("a # b"),
            Err(Error::Syntax { line: 1, column: 3, .. })
        ));
    }
}
