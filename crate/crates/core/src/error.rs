use thiserror::Error;

/// Errors raised by the closed-form system model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("non-positive {what}: {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("power demand infeasible: exponent {exponent} exceeds cap {cap}")]
    PowerDemandInfeasible { exponent: f64, cap: f64 },
}

/// Errors raised while loading or validating a scenario configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Missing {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("value out of range for `{key}`: {message}")]
    Range { key: String, message: String },
}

/// Crate-level error.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("enumeration refused: {assignments} assignments exceed cap {cap}")]
    EnumerationCap { assignments: u128, cap: u64 },
    #[error("no feasible record to aggregate")]
    EmptyRecords,
    #[error("server capacities ({capacity}) cannot host {transmitters} transmitters")]
    InsufficientCapacity {
        capacity: usize,
        transmitters: usize,
    },
    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),
    #[error("output error: {0}")]
    Output(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
