use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("cannot flip {count} bits of a {dim}-bit vector")]
    TooManyFlips { count: usize, dim: usize },
    #[error("invalid basis parameters: {0}")]
    InvalidBasis(String),
    #[error("malformed encoding: {0}")]
    Decode(String),

    #[error("lookup on an empty table")]
    EmptyTable,
    #[error("server {0} already joined")]
    DuplicateServer(String),
    #[error("server {0} is not in the table")]
    UnknownServer(String),
    #[error("identifier must be non-empty")]
    EmptyId,
    #[error("table capacity exceeded: {servers} servers need more than {capacity} basis vectors")]
    CapacityExceeded { servers: usize, capacity: usize },
    #[error("invalid table configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid noise spec: {0}")]
    InvalidNoise(String),
    #[error("{flips} flips do not fit in a {total_bits}-bit surface")]
    SurfaceTooSmall { flips: usize, total_bits: usize },

    #[error("assignment maps cover different request sequences")]
    SequenceMismatch,
    #[error("chi-squared needs at least one request and one server")]
    NoRequests,
    #[error("counts length {counts} does not match {servers} servers")]
    CountMismatch { counts: usize, servers: usize },

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
