use thiserror::Error;

/// Domain errors raised by the constructions. Violated hypotheses are errors;
/// failed trace checks are report entries, not errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("escape bound violated: f({index}) = {value} but E({value}) = {bound} <= {index}")]
    CertificateViolation { index: usize, value: u64, bound: usize },

    #[error("name exhausted: requested {requested} values, only {available} exist")]
    Exhausted { requested: usize, available: usize },

    #[error("operation needs an escape-bound witness: {0}")]
    MissingWitness(String),

    #[error("no permutation: {0}")]
    NoPermutation(String),

    #[error("bound violation: {0}")]
    BoundViolation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("hypothesis violated at step {step}: {message}")]
    HypothesisViolation { step: usize, message: String },

    #[error("schedule stalled: {0}")]
    ScheduleStall(String),

    #[error("denomination error: {0}")]
    Denomination(String),

    #[error("split infeasible: {0}")]
    SplitInfeasible(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("syntax error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::CertificateViolation { .. } => "certificate-violation",
            Error::Exhausted { .. } => "exhausted",
            Error::MissingWitness(_) => "missing-witness",
            Error::NoPermutation(_) => "no-permutation",
            Error::BoundViolation(_) => "bound-violation",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::InsufficientData(_) => "insufficient-data",
            Error::SearchExhausted(_) => "search-exhausted",
            Error::Unsupported(_) => "unsupported",
            Error::HypothesisViolation { .. } => "hypothesis-violation",
            Error::ScheduleStall(_) => "schedule-stall",
            Error::Denomination(_) => "denomination",
            Error::SplitInfeasible(_) => "split-infeasible",
            Error::BudgetExceeded(_) => "budget-exceeded",
            Error::Parse { .. } => "syntax",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
