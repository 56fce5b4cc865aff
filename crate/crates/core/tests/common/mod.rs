#![allow(dead_code)]

use gensemcom::experiment::{build_realization, trial_rng, StreamRole};
use gensemcom::{Realization, ScenarioConfig};

/// Reference-scenario config with `n` transmitters and `k` servers.
pub fn config(n: usize, k: usize) -> ScenarioConfig {
    let mut c = ScenarioConfig::default();
    c.transmitters = n;
    c.servers = k;
    c
}

pub fn realization(c: &ScenarioConfig, seed: u64, trial: u64) -> Realization {
    build_realization(c, &mut trial_rng(seed, trial, StreamRole::Realization)).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
