use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("instance has no data entries")]
    NoEntries,
    #[error("t exceeds k (t = {t}, k = {k})")]
    TExceedsK { t: usize, k: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("negative or non-finite weight {value} at {location}")]
    BadWeight { value: f64, location: String },
    #[error("property {0} has no members")]
    EmptyProperty(usize),
    #[error("property {property}: weights sum {sum} ≠ 1")]
    WeightSum { property: usize, sum: f64 },
    #[error("property {0} is missing disclosure weights")]
    MissingWeights(usize),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("property {property} must reference exactly two users, found {found}")]
    NotAUserPair { property: usize, found: usize },
    #[error("entry {0} has no check-in payload")]
    MissingPayload(usize),
    #[error("utility normalization constant is zero")]
    ZeroNormalization,
    #[error("bit already set: entry {entry}, adversary {adversary}")]
    BitAlreadySet { entry: usize, adversary: usize },
    #[error("bit not set: entry {entry}, adversary {adversary}")]
    BitNotSet { entry: usize, adversary: usize },
    #[error("instance too large for exact search ({bits:.1} bits > {limit} bits)")]
    TooLarge { bits: f64, limit: f64 },
    #[error("no assignment satisfies the disclosure budget")]
    Infeasible,
    #[error("linear relaxation is infeasible")]
    LpInfeasible,
    #[error("linear relaxation failed: {0}")]
    LpFailure(String),
    #[error("disclosure family {0} is not supported here")]
    UnsupportedFamily(String),
    #[error("thresholds must be sorted ascending")]
    UnsortedThresholds,
    #[error("no valid check-in lines")]
    NoCheckins,
    #[error("no friendship edge survives filtering")]
    NoFriendships,
    #[error("p_f too small for non-empty properties (property {0} empty after retries)")]
    DegenerateEdgeProbability(usize),
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
