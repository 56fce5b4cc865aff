//! Joint prompt-generation offloading and resource allocation for
//! generative semantic communication over edge networks.
//!
//! The core is generic over the float type; `f64` aliases are provided for
//! the experiment harness and the CLI.

pub mod benchmarks;
pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod inner;
pub mod matching;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod search;

pub use config::{parse_config, ScenarioConfig};
pub use error::{ConfigError, Error, ModelError, Result};
pub use scalar::Scalar;

pub type Realization = model::NetworkRealization<f64>;
pub type Realization32 = model::NetworkRealization<f32>;
pub type Solution = inner::InnerSolution<f64>;
pub type Solution32 = inner::InnerSolution<f32>;
pub type Settings = inner::SolverSettings<f64>;
pub type Outcome = model::PairOutcome<f64>;
