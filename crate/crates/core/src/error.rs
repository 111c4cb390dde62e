use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("could not allocate a table of {0} entries")]
    Allocation(usize),

    #[error("table of kind {kind} covers 0..={have}, but index {need} was requested")]
    TableCoverage {
        kind: &'static str,
        have: usize,
        need: usize,
    },

    #[error("expected a table of kind {expected}, found {found}")]
    WrongKind {
        expected: &'static str,
        found: &'static str,
    },

    #[error("brute-force enumeration is capped at n = {cap}, got {n}")]
    EnumerationCap { n: u64, cap: u64 },

    #[error("invalid range {lo}..={hi}")]
    InvalidRange { lo: u64, hi: u64 },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("division by a ball that contains zero")]
    DivisionByZero,

    #[error("{function} is undefined on a ball around {value}")]
    Domain {
        function: &'static str,
        value: String,
    },

    #[error("numeric overflow in {0}")]
    Overflow(&'static str),

    #[error("sign still undecided at {0} bits")]
    PrecisionExhausted(u32),

    #[error("requires n >= {min}, got {n}")]
    BelowThreshold { n: u64, min: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("malformed table file: {0}")]
    TableFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
