use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is {0}x{1}, expected square")]
    NotSquare(usize, usize),

    #[error("matrix has rank {rank}, expected full column rank {cols}")]
    RankDeficient { rank: usize, cols: usize },

    #[error("enumeration cap exceeded: {what} needs {needed} steps, cap is {cap}")]
    CapExceeded { what: &'static str, needed: u128, cap: u128 },

    #[error("|det H| = {delta} exceeds the coset cap {cap}")]
    DeltaCapExceeded { delta: String, cap: u64 },

    #[error("matrix is not strictly Delta-modular")]
    NotStrictlyModular,

    #[error("no basis with |det| = {0}")]
    NoBasis(String),

    #[error("reformulation failed: {0}")]
    Reformulation(String),

    #[error("right-hand side is not in the column span of A")]
    NotInSpan,

    #[error("matroid is not graphic: {0}")]
    NotGraphic(String),

    #[error("graph realization search budget of {0} nodes exhausted")]
    SearchBudget(u64),

    #[error("graph hint rejected: {0}")]
    InvalidHint(String),

    #[error("sign fixing failed: {0}")]
    SignFix(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("instance rejected by condition check: {0}")]
    Rejected(String),

    #[error("condition check undecided: {0}")]
    Undecided(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("emission failed: {0}")]
    Emit(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
