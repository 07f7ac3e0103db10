use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("values do not form a bijection of the domain: {0}")]
    NotABijection(String),
    #[error("induced permutation requested on an empty subset")]
    EmptySubset,
    #[error("{value} is outside the domain [{lo}, {hi}]")]
    OutOfDomain { value: i64, lo: i64, hi: i64 },
    #[error("invalid Lehmer code: {0}")]
    InvalidCode(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("size {size} exceeds the limit {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("[{sub_lo}, {sub_hi}] is not a nonempty subinterval of [{lo}, {hi}]")]
    NotSubinterval { sub_lo: i64, sub_hi: i64, lo: i64, hi: i64 },
    #[error("a person cannot be compared with themselves")]
    SamePerson,
    #[error("more than {limit} stable matchings")]
    LimitExceeded { limit: usize },
    #[error("work budget of {budget} exhausted: {diagnostic}")]
    BudgetExceeded { budget: u64, diagnostic: String },
    #[error("no finite bound value for any N in [1, {n_max}]")]
    NoFiniteValue { n_max: u64 },
    #[error("all {trials} trials failed")]
    AllTrialsFailed { trials: usize },
    #[error("value overflows f64; use the log-space variant")]
    Overflow,
    #[error("{path}: {pointer}: {message}")]
    Malformed { path: String, pointer: String, message: String },
    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. } | Error::LimitExceeded { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
