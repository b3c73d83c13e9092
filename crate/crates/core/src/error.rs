use thiserror::Error;

use crate::data::Analysis;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("column `{0}` not found in header")]
    MissingColumn(String),

    #[error("row {row}, column `{column}`: {message}")]
    Parse {
        /// 1-based data row (the header is row 0).
        row: usize,
        column: String,
        message: String,
    },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("{analysis:?} cannot run on this dataset: {reason}")]
    RequirementUnmet { analysis: Analysis, reason: String },

    #[error("treatment arm d={0} has no units")]
    EmptyArm(u8),

    #[error("no units with d={d}, m={m}")]
    EmptyCell { d: u8, m: u8 },

    #[error("post-treatment indicator is missing in the d={0} arm")]
    MissingM(u8),

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("monotonicity violated in sample: estimated complier share {complier_share} < 0")]
    MonotonicityViolatedEmpirically { complier_share: f64 },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("trimming fraction is zero; the trimmed mean is undefined")]
    ZeroFraction,

    #[error("empty input")]
    EmptyInput,

    #[error("no treated unit has m=1; the reactive group is empty")]
    NoReactiveTreated,

    #[error("type-3 bounds require a non-negative control mean, got {0}")]
    NegativeControlMean(f64),

    #[error("degenerate share Pr(M(1)=1) = {0}")]
    DegenerateP(f64),

    #[error("sign-based assumption needs a nonzero total effect")]
    SignUndefined,

    #[error("degenerate strata share: {0}")]
    DegenerateShare(String),

    #[error("all {0} bootstrap replicates failed")]
    AllReplicatesFailed(usize),

    #[error("block resampling requires a block label on every unit")]
    MissingBlockLabels,

    #[error("enumeration over {n} values exceeds the limit of {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("Pr(AT) + Pr(C) = 0; TRACE is undefined")]
    EmptyReactiveStratum,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MissingColumn(_) => "MissingColumn",
            Error::Parse { .. } => "ParseError",
            Error::InvariantViolation(_) => "InvariantViolation",
            Error::RequirementUnmet { .. } => "RequirementUnmet",
            Error::EmptyArm(_) => "EmptyArm",
            Error::EmptyCell { .. } => "EmptyCell",
            Error::MissingM(_) => "MissingM",
            Error::RankDeficient => "RankDeficient",
            Error::MonotonicityViolatedEmpirically { .. } => "MonotonicityViolatedEmpirically",
            Error::OutOfRange(_) => "OutOfRange",
            Error::ZeroFraction => "ZeroFraction",
            Error::EmptyInput => "EmptyInput",
            Error::NoReactiveTreated => "NoReactiveTreated",
            Error::NegativeControlMean(_) => "NegativeControlMean",
            Error::DegenerateP(_) => "DegenerateP",
            Error::SignUndefined => "SignUndefined",
            Error::DegenerateShare(_) => "DegenerateShare",
            Error::AllReplicatesFailed(_) => "AllReplicatesFailed",
            Error::MissingBlockLabels => "MissingBlockLabels",
            Error::TooLarge { .. } => "TooLarge",
            Error::EmptyReactiveStratum => "EmptyReactiveStratum",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
        }
    }

    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(e) => e.is_io_error(),
            _ => false,
        }
    }
}
