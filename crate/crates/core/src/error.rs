use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{kernel} kernel at i={time}, row ({parents}): probabilities sum to {sum}")]
    RowSum {
        kernel: String,
        time: usize,
        parents: String,
        sum: f64,
    },

    #[error(
        "{kernel} kernel at i={time}, row ({parents}): entry {value} is negative or not finite"
    )]
    NegativeProbability {
        kernel: String,
        time: usize,
        parents: String,
        value: f64,
    },

    #[error("{kernel} kernel at i={time}: expected {expected} rows, found {found}")]
    MissingEntry {
        kernel: String,
        time: usize,
        expected: usize,
        found: usize,
    },

    #[error("{kernel}: expected {expected} kernels for horizon {horizon}, found {found}")]
    KernelCount {
        kernel: String,
        horizon: usize,
        expected: usize,
        found: usize,
    },

    #[error("{0}")]
    Invalid(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{count} trajectories exceed the enumeration budget of {budget}")]
    BudgetExceeded { count: u128, budget: u64 },

    #[error("symbol {value} out of range for {coord} (alphabet size {size})")]
    SymbolOutOfRange {
        coord: String,
        value: usize,
        size: usize,
    },

    #[error("overlapping selectors: {0}")]
    OverlappingSelectors(String),

    #[error("invalid selector: {0}")]
    InvalidSelector(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown tag `{0}`")]
    UnknownTag(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("incompatible flags: {0}")]
    IncompatibleFlags(String),

    #[error("sample set is empty")]
    EmptySampleSet,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable category, used on the CLI diagnostic stream.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::RowSum { .. } => "row_sum",
            Error::NegativeProbability { .. } => "negative_probability",
            Error::MissingEntry { .. } => "missing_entry",
            Error::KernelCount { .. } => "kernel_count",
            Error::Invalid(_) => "invalid",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::SymbolOutOfRange { .. } => "symbol_out_of_range",
            Error::OverlappingSelectors(_) => "overlapping_selectors",
            Error::InvalidSelector(_) => "invalid_selector",
            Error::Precondition(_) => "precondition",
            Error::UnknownTag(_) => "unknown_tag",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::IncompatibleFlags(_) => "incompatible_flags",
            Error::EmptySampleSet => "empty_sample_set",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }
}
