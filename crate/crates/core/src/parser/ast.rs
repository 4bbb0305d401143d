use num_bigint::BigInt;

/// Script-level syntax tree, before evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ast {
    Number(BigInt),
    Ident(String),
    Call {
        name: String,
        args: Vec<Ast>,
        quoted: bool,
    },
    List(Vec<Ast>),
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, Box<Ast>),
    /// `a = b`, evaluated as `a - b`.
    Equation(Box<Ast>, Box<Ast>),
}

impl Ast {
    pub fn call(name: &str, args: Vec<Ast>) -> Ast {
        Ast::Call {
            name: name.to_string(),
            args,
            quoted: false,
        }
    }

    pub fn as_ident(&self) -> Option<&str> {
        match self {
            Ast::Ident(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatementKind {
    Expression(Ast),
    Assignment(String, Ast),
    /// A top-level call to a session command (`imetric`, `decsym`, `ishow`, ...).
    Command(String, Vec<Ast>),
    Quit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub kind: StatementKind,
    /// `;`-terminated statements echo their result, `$` ones do not.
    pub echo: bool,
    pub line: usize,
}
