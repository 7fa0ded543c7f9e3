use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    DimMismatch { expected: usize, got: usize },
    BadLength { expected: usize, got: usize },
    BadInput(String),
    DoubleMeasure { position: usize },
    CapExceeded { what: &'static str, needed: u128, cap: u128 },
    NotNormalized,
    NotFullColumnRank,
    DuplicateAbscissa,
    TooLarge { what: &'static str, size: u128, limit: u128 },
    EmptySupport,
    PhaseViolation(&'static str),
    DepthCap { length: u128, cap: u128 },
    FormatError(String),
    BlockDepthExceeded { block: usize, depth: usize, limit: usize },
    Finalized,
    AlreadyFinalized,
    QuotaExceeded { quota: usize },
    BudgetViolation { retained: usize, budget: usize },
    ZeroEvidence,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::BadLength { expected, got } => {
                write!(f, "bad length: expected {expected}, got {got}")
            }
            Error::BadInput(msg) => write!(f, "bad input: {msg}"),
            Error::DoubleMeasure { position } => {
                write!(f, "qubit {position} was already measured")
            }
            Error::CapExceeded { what, needed, cap } => {
                write!(f, "{what} cap exceeded: needs {needed}, cap is {cap}")
            }
            Error::NotNormalized => write!(f, "state vector is not normalized"),
            Error::NotFullColumnRank => write!(f, "matrix does not have full column rank"),
            Error::DuplicateAbscissa => write!(f, "interpolation points share an abscissa"),
            Error::TooLarge { what, size, limit } => {
                write!(f, "{what} too large for exhaustive mode: {size} > {limit}")
            }
            Error::EmptySupport => write!(f, "distribution has empty support"),
            Error::PhaseViolation(msg) => write!(f, "protocol phase violation: {msg}"),
            Error::DepthCap { length, cap } => {
                write!(f, "compiled length {length} exceeds instruction cap {cap}")
            }
            Error::FormatError(msg) => write!(f, "format error: {msg}"),
            Error::BlockDepthExceeded { block, depth, limit } => {
                write!(f, "block {block} has depth {depth}, limit is {limit}")
            }
            Error::Finalized => write!(f, "session already finalized"),
            Error::AlreadyFinalized => write!(f, "finalize called twice"),
            Error::QuotaExceeded { quota } => write!(f, "issuance quota of {quota} exhausted"),
            Error::BudgetViolation { retained, budget } => {
                write!(f, "adversary retained {retained} qubits, budget is {budget}")
            }
            Error::ZeroEvidence => write!(f, "no input is consistent with the recorded outcomes"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
