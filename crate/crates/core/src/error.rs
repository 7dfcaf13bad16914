use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain is empty")]
    EmptyDomain,
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("symbol `{0}` must have arity >= 1")]
    ZeroArity(String),
    #[error("unknown domain element `{0}`")]
    UnknownElement(String),
    #[error("unknown vocabulary symbol `{0}`")]
    UnknownSymbol(String),
    #[error("unknown module `{0}`")]
    UnknownModule(String),
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("structure needs {bits} bits, cap is {cap}")]
    CapExceeded { bits: usize, cap: usize },
    #[error("relational variable `{0}` is not mapped to a vocabulary symbol")]
    UnmappedVariable(String),
    #[error("module variable `{0}` is not bound")]
    UnboundModuleVar(String),
    #[error("set variable `{0}` is not bound")]
    UnboundSetVar(String),
    #[error("module variable `{0}` is bound to a value of the wrong shape")]
    ShapeMismatch(String),
    #[error("fixpoint iteration shrank the approximation (body is not monotone)")]
    NonMonotoneDetected,
    #[error("selection operands {0} cannot be classified as inputs or outputs")]
    IllegalSelect(String),
    #[error("structure does not match the valuation's signature")]
    IncompleteStructure,
    #[error("unsafe rule: {0}")]
    UnsafeRule(String),
    #[error("variable `{0}` is not encoded as a unary singleton")]
    NonSingletonEncoding(String),
    #[error("formula is not propositional: {0}")]
    NonPropositionalFormula(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("ill-formed expression: {0}")]
    IllFormed(String),
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
