use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("formula syntax error at offset {offset}: {msg}")]
    FormulaSyntax { offset: usize, msg: String },

    #[error("vocabulary mismatch: {0}")]
    VocabularyMismatch(String),

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unbound free variable x{0}")]
    UnboundVariable(u32),

    #[error("modal formula evaluated over a non-modal vocabulary")]
    NonModalVocabulary,

    #[error("structure has no distinguished point")]
    MissingPoint,

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("not a homomorphism: {0}")]
    NotHomomorphism(String),

    #[error("invalid coalgebra: {0}")]
    InvalidCoalgebra(String),

    #[error("morphism kind does not apply: {0}")]
    KindMismatch(String),

    #[error("not a forest morphism: {0}")]
    NotForestMorphism(String),

    #[error("Duplicator wins; there is no distinguishing formula")]
    DuplicatorWins,

    #[error("illegal move in round {round}: {msg}")]
    IllegalMove { round: usize, msg: String },

    /// A constructed witness failed its own verification.
    #[error("internal verification failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        msg: msg.into(),
    })
}
