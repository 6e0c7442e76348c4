use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cell size must be positive, got {0}")]
    NonPositiveCellSize(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite coordinate in point {index}")]
    NonFiniteCoordinate { index: usize },
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
    #[error("constraint has arity {expected} but the tuple has {found} points")]
    ArityMismatch { expected: usize, found: usize },
    #[error("arity {k} exceeds cloud size {n}")]
    ArityExceedsCloud { k: usize, n: usize },
    #[error("brute force would enumerate {count} subsets (limit {limit})")]
    TooManySubsets { count: f64, limit: f64 },
    #[error("count at threshold {threshold} is not determined by a truncated stream")]
    IndeterminateCount { threshold: f64 },
    #[error("only {found} qualifying tuples, {requested} needed")]
    InsufficientExtremes { requested: usize, found: usize },
    #[error("layered Hill value must be positive, got {0}")]
    NonPositiveH(f64),
    #[error("unsupported constraint: {0}")]
    UnsupportedConstraint(String),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("the diverging regime is only supported for k = 1 (got k = {k})")]
    UnsupportedRegime { k: usize },
    #[error("constant regime requires xi")]
    MissingXi,
    #[error("confidence interval denominator is not positive")]
    DegenerateInterval,
    #[error("probability {0} is outside (0, 1)")]
    ProbabilityOutOfRange(f64),
    #[error("cannot remove {remove} points from a cloud of {n}")]
    RemoveCountExceedsCloud { remove: usize, n: usize },
    #[error("empty sample")]
    EmptySample,
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
