use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero polynomial")]
    DivisionByZero,

    #[error("matrix is singular over function field")]
    Singular,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("nonlinear term: {0}")]
    Nonlinear(String),

    #[error("oracle `{0}` is called more than once")]
    DuplicateOracleCall(String),

    #[error("invalid algorithm: {0}")]
    Invalid(String),

    #[error("substitution makes a denominator vanish: {0}")]
    Pole(String),

    #[error("no nontrivial cyclic permutation: {0}")]
    NoCyclicPermutation(String),

    #[error("inadmissible shift: {0}")]
    InadmissibleShift(String),

    #[error("inadmissible delay: {0}")]
    InadmissibleDelay(String),

    #[error("realization is not causal as ordered: {0}")]
    NotCausal(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("library entry `{entry}`: {message}")]
    Library { entry: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
