use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("index {0} appears three or more times in one term")]
    TripleIndex(String),
    #[error("index {0} is repeated with the same variance")]
    VarianceClash(String),
    #[error("{name} used with rank {found}, previously rank {expected}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("terms disagree on free indices: {left} vs {right}")]
    MixedFreeIndices { left: String, right: String },

    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown command or function `{0}`")]
    UnknownCommand(String),

    #[error("conflicting symmetry declaration for {0}")]
    ConflictingDeclaration(String),
    #[error("invalid symmetry declaration: {0}")]
    InvalidSymmetry(String),
    #[error("no metric configured (use imetric)")]
    NoMetric,
    #[error("canonical form search exceeds {0} candidates")]
    TooManyCandidates(u128),

    #[error("expression is not an antisymmetric covariant form: {0}")]
    NotAntisymmetric(String),
    #[error("pattern index {0} collides with the expression")]
    PatternIndexCollision(String),

    #[error("replacement uses metavariable {0} not bound by the pattern")]
    UnboundMetavariable(String),
    #[error("rule {0}: pattern and replacement have different free indices")]
    RuleFreeIndexMismatch(String),
    #[error("apply1 did not reach a fixpoint within {0} passes")]
    IterationCapExceeded(usize),
    #[error("component definition for {0} does not match its index signature")]
    SignatureMismatch(String),
    #[error("unknown rule {0}")]
    UnknownRule(String),

    #[error("lagrangian has free indices {0}")]
    NonScalarLagrangian(String),
    #[error("free index mismatch: {0}")]
    FreeIndexMismatch(String),

    #[error("history reference %th({0}) is out of range")]
    History(usize),
    #[error("{0} has no expression value")]
    NotAnExpression(String),
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("free index {0} has no value")]
    UnboundIndex(String),
    #[error("inert covariant derivative cannot be evaluated numerically")]
    InertOperatorPresent,
}

impl Error {
    pub fn is_parse_error(&self) -> bool {
        matches!(self, Error::Syntax { .. } | Error::UnknownCommand(_))
    }
}
