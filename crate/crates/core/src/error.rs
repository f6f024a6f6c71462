use thiserror::Error;

/// Errors produced anywhere in the pipeline, from the parser to the checker.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },

    #[error("duplicate declaration: {0}")]
    DuplicateDeclaration(String),

    #[error("unknown sort `{0}`")]
    UnknownSort(String),

    #[error("unknown operator `{0}`")]
    UnknownOperator(String),

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("ambiguous overload for `{name}`: candidates {candidates:?}")]
    AmbiguousOverload {
        name: String,
        candidates: Vec<String>,
    },

    #[error("unknown module `{0}`")]
    MissingModule(String),

    #[error("cyclic import through `{0}`")]
    CyclicImport(String),

    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),

    #[error("unknown rule label `{0}`")]
    UnknownRuleLabel(String),

    #[error("no sort for term `{0}`")]
    NoSort(String),

    #[error("substitution produced an unsortable term: {0}")]
    UnsortableResult(String),

    #[error("variable `{0}` is not bound by any earlier source")]
    UnboundVariable(String),

    #[error("rule `{label}` has {fragments} rewriting condition fragments but {strategies} condition strategies were supplied")]
    ArityMismatch {
        label: String,
        fragments: usize,
        strategies: usize,
    },

    #[error("equational reduction exceeded the ceiling of {0} rewrites")]
    ReduceCeiling(u64),

    #[error("state space exceeded the ceiling of {0} states")]
    StateSpaceCeiling(usize),

    #[error("proposition `{0}` did not reduce to a boolean on `{1}`")]
    UndefinedProposition(String, String),

    #[error("proposition term `{0}` does not have sort Prop or Formula")]
    PropSortMismatch(String),

    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn syntax(line: u32, col: u32, msg: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }
}
