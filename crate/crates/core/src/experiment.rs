//! Monte-Carlo harness: realizations, trial loops, sweeps and aggregation.
//!
//! Trial `t` draws from its own ChaCha8 stream keyed by the master seed,
//! with stream id `4 * t + role` (role 0 = realization, 1 = initial
//! matching). Adding trials therefore never changes earlier ones. The
//! proposed scheme and SUO start from the same random matching.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{run_fodpg, run_fopg, run_proposed, run_suo, SolveOutcome};
use crate::channel::{noise_power, sample_gains, sample_geometry};
use crate::config::{ScenarioConfig, SetError};
use crate::error::{ConfigError, Error, Result};
use crate::inner::SolverSettings;
use crate::matching::SljSettings;
use crate::model::{
    EdgeModel, ModelProfile, NetworkRealization, Radio, ServerProfile, TransmitterProfile,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Proposed,
    Fopg,
    Fodpg,
    Suo,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Proposed, Scheme::Fopg, Scheme::Fodpg, Scheme::Suo];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::Fopg => "fopg",
            Scheme::Fodpg => "fodpg",
            Scheme::Suo => "suo",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownScheme(s.to_string()))
    }
}

#[repr(u64)]
#[derive(Debug, Clone, Copy)]
pub enum StreamRole {
    Realization = 0,
    Matching = 1,
}

/// Random source of `(trial, role)` under `seed`.
pub fn trial_rng(seed: u64, trial: u64, role: StreamRole) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial * 4 + role as u64);
    rng
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.gen();
    lo + (hi - lo) * u
}

/// Samples one network: geometry, fading, per-node frequency budgets and
/// model architectures, with FLOPs/CIDEr looked up for the prompt length.
pub fn build_realization<T: Scalar, R: Rng + ?Sized>(
    config: &ScenarioConfig,
    rng: &mut R,
) -> Result<NetworkRealization<T>, ConfigError> {
    let geom = sample_geometry::<T, R>(config, rng);
    let gains = sample_gains(&geom, config, rng);
    let c = &config.compute;
    let bits = config.task.prompt_bits;
    let lookup = |arch: &str| -> Result<(f64, f64), ConfigError> {
        let entry = config.models.architectures.get(arch);
        match entry.and_then(|a| a.quality.get(&bits).map(|q| (a.flops, *q))) {
            Some(v) => Ok(v),
            None => Err(ConfigError::Range {
                key: format!("models.quality.{arch}.{bits}"),
                message: format!("no (architecture, prompt length) entry for ({arch}, {bits})"),
            }),
        }
    };
    let f_local: Vec<f64> = (0..config.transmitters)
        .map(|_| uniform(rng, c.local_freq_min_hz, c.local_freq_max_hz))
        .collect();
    let f_edge: Vec<f64> = (0..config.servers)
        .map(|_| uniform(rng, c.edge_freq_min_hz, c.edge_freq_max_hz))
        .collect();
    let device: Vec<&String> = (0..config.transmitters)
        .map(|_| &config.models.device_pool[rng.gen_range(0..config.models.device_pool.len())])
        .collect();
    let edge: Vec<&String> = (0..config.servers)
        .map(|_| &config.models.edge_pool[rng.gen_range(0..config.models.edge_pool.len())])
        .collect();

    let mut transmitters = Vec::with_capacity(config.transmitters);
    for (n, arch) in device.iter().enumerate() {
        let (flops, quality) = lookup(arch)?;
        transmitters.push(TransmitterProfile {
            source_bits: T::lit(config.task.source_bits),
            prompt_bits: T::lit(f64::from(bits)),
            device_model: ModelProfile {
                flops: T::lit(flops),
                intensity: T::lit(c.intensity_cycles_per_flop),
                quality: T::lit(quality),
            },
            p_max: T::lit(config.radio.tx_power_max_w),
            f_max_local: T::lit(f_local[n]),
            kappa_eff: T::lit(c.capacitance),
            e_max: T::lit(c.energy_budget_j),
        });
    }
    let mut servers = Vec::with_capacity(config.servers);
    for (k, arch) in edge.iter().enumerate() {
        let (flops, quality) = lookup(arch)?;
        servers.push(ServerProfile {
            edge_model: EdgeModel {
                flops: T::lit(flops),
                intensity: T::lit(c.intensity_cycles_per_flop),
                quality: vec![T::lit(quality); config.transmitters],
            },
            p_hat_max: T::lit(config.radio.server_power_max_w),
            f_max_edge: T::lit(f_edge[k]),
            capacity: config.server_capacity,
        });
    }
    Ok(NetworkRealization {
        transmitters,
        servers,
        gains,
        radio: Radio {
            bandwidth: T::lit(config.radio.bandwidth_hz),
            noise: noise_power(
                T::lit(config.radio.noise_psd_dbm_per_hz),
                T::lit(config.radio.bandwidth_hz),
            ),
            exponent_cap: T::lit(config.solver.exponent_cap),
        },
    })
}

pub fn slj_settings(config: &ScenarioConfig) -> SljSettings<f64> {
    SljSettings {
        solver: SolverSettings::from_config(&config.solver),
        restarts: config.matching.restarts,
        operation_cap: None,
    }
}

/// Flattened per-scheme result of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeRecord {
    pub scheme: Scheme,
    pub feasible: bool,
    pub max_ccq: f64,
    pub max_latency: f64,
    pub min_cider: f64,
    pub mean_cider: f64,
    pub max_cider: f64,
    pub offloaded: usize,
    pub objective: f64,
    pub operations: usize,
    pub pair_ccq: Vec<f64>,
    pub pair_latency: Vec<f64>,
    pub pair_cider: Vec<f64>,
}

impl SchemeRecord {
    pub fn from_outcome(scheme: Scheme, out: &SolveOutcome<f64>) -> Self {
        let pairs = out.outcomes();
        Self {
            scheme,
            feasible: out.feasible(),
            max_ccq: out.max_ccq(),
            max_latency: out.max_latency(),
            min_cider: out.min_cider(),
            mean_cider: out.mean_cider(),
            max_cider: out.max_cider(),
            offloaded: out.offloaded_count(),
            objective: out.objective,
            operations: out.operations,
            pair_ccq: pairs.iter().map(|o| o.ccq).collect(),
            pair_latency: pairs.iter().map(|o| o.latency).collect(),
            pair_cider: pairs.iter().map(|o| o.quality).collect(),
        }
    }

    fn infeasible(scheme: Scheme) -> Self {
        Self {
            scheme,
            feasible: false,
            max_ccq: f64::INFINITY,
            max_latency: f64::NAN,
            min_cider: f64::NAN,
            mean_cider: f64::NAN,
            max_cider: f64::NAN,
            offloaded: 0,
            objective: f64::INFINITY,
            operations: 0,
            pair_ccq: Vec::new(),
            pair_latency: Vec::new(),
            pair_cider: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub schemes: Vec<SchemeRecord>,
}

impl TrialRecord {
    pub fn get(&self, scheme: Scheme) -> Option<&SchemeRecord> {
        self.schemes.iter().find(|r| r.scheme == scheme)
    }
}

/// Runs the requested schemes on trial `trial` of `config`.
pub fn run_trial(config: &ScenarioConfig, trial: u64, schemes: &[Scheme]) -> Result<TrialRecord> {
    let seed = config.experiment.seed;
    let net: NetworkRealization<f64> =
        build_realization(config, &mut trial_rng(seed, trial, StreamRole::Realization))?;
    let slj = slj_settings(config);
    let records = schemes
        .iter()
        .map(|&scheme| {
            let out = match scheme {
                Scheme::Proposed => Some(run_proposed(
                    &net,
                    &slj,
                    &mut trial_rng(seed, trial, StreamRole::Matching),
                )),
                Scheme::Suo => Some(run_suo(
                    &net,
                    &slj,
                    &mut trial_rng(seed, trial, StreamRole::Matching),
                )),
                Scheme::Fodpg => Some(run_fodpg(&net, &slj.solver)),
                Scheme::Fopg => run_fopg(&net, &slj.solver).ok(),
            };
            match out {
                Some(o) => SchemeRecord::from_outcome(scheme, &o),
                None => SchemeRecord::infeasible(scheme),
            }
        })
        .collect();
    Ok(TrialRecord {
        trial,
        schemes: records,
    })
}

/// Order-independent summary of one scheme over many trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeAggregate {
    pub scheme: Scheme,
    pub trials: usize,
    pub feasible_trials: usize,
    pub infeasible_trials: usize,
    pub mean_max_ccq: f64,
    pub max_max_ccq: f64,
    pub mean_max_latency: f64,
    pub mean_cider: f64,
    pub mean_max_cider: f64,
    pub mean_min_cider: f64,
    pub mean_offloaded: f64,
    pub pair_ccq_mean: f64,
    pub pair_ccq_variance: f64,
}

/// Mean of `values`, summed in sorted order so the result does not depend
/// on the order trials were produced in.
fn stable_mean(mut values: Vec<f64>) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

/// Pooled mean and population variance of a sample.
fn mean_variance(values: Vec<f64>) -> (f64, f64) {
    let mean = stable_mean(values.clone());
    let var = stable_mean(values.iter().map(|v| (v - mean) * (v - mean)).collect());
    (mean, var)
}

pub fn aggregate(records: &[TrialRecord], scheme: Scheme) -> SchemeAggregate {
    let rows: Vec<&SchemeRecord> = records.iter().filter_map(|r| r.get(scheme)).collect();
    let ok: Vec<&SchemeRecord> = rows.iter().copied().filter(|r| r.feasible).collect();
    let col = |f: fn(&SchemeRecord) -> f64| stable_mean(ok.iter().map(|r| f(r)).collect());
    let (pair_ccq_mean, pair_ccq_variance) = if ok.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        mean_variance(ok.iter().flat_map(|r| r.pair_ccq.iter().copied()).collect())
    };
    SchemeAggregate {
        scheme,
        trials: rows.len(),
        feasible_trials: ok.len(),
        infeasible_trials: rows.len() - ok.len(),
        mean_max_ccq: col(|r| r.max_ccq),
        max_max_ccq: ok.iter().map(|r| r.max_ccq).fold(f64::NAN, f64::max),
        mean_max_latency: col(|r| r.max_latency),
        mean_cider: col(|r| r.mean_cider),
        mean_max_cider: col(|r| r.max_cider),
        mean_min_cider: col(|r| r.min_cider),
        mean_offloaded: col(|r| r.offloaded as f64),
        pair_ccq_mean,
        pair_ccq_variance,
    }
}

/// Mean and population variance of per-pair CCQ for `scheme`, pooled over
/// every pair of every feasible trial.
pub fn fairness_stats(records: &[TrialRecord], scheme: Scheme) -> Result<(f64, f64)> {
    let values: Vec<f64> = records
        .iter()
        .filter_map(|r| r.get(scheme))
        .filter(|r| r.feasible)
        .flat_map(|r| r.pair_ccq.iter().copied())
        .collect();
    if values.is_empty() {
        return Err(Error::EmptyRecords);
    }
    Ok(mean_variance(values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub records: Vec<TrialRecord>,
    pub aggregates: Vec<SchemeAggregate>,
}

impl ExperimentResult {
    pub fn aggregate(&self, scheme: Scheme) -> Option<&SchemeAggregate> {
        self.aggregates.iter().find(|a| a.scheme == scheme)
    }
}

/// Runs `config.experiment.trials` independent trials in parallel.
pub fn run_trials(config: &ScenarioConfig, schemes: &[Scheme]) -> Result<ExperimentResult> {
    config.validate()?;
    let records: Vec<TrialRecord> = (0..config.experiment.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(config, t, schemes))
        .collect::<Result<_>>()?;
    let aggregates = schemes.iter().map(|&s| aggregate(&records, s)).collect();
    Ok(ExperimentResult {
        records,
        aggregates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub key: String,
    pub value: String,
    pub aggregates: Vec<SchemeAggregate>,
}

/// Applies `key = value` to a copy of `config`.
pub fn with_override(config: &ScenarioConfig, key: &str, value: &str) -> Result<ScenarioConfig> {
    let mut c = config.clone();
    c.set(key, value).map_err(|e| match e {
        SetError::UnknownKey => ConfigError::UnknownKey {
            line: 0,
            key: key.to_string(),
        },
        SetError::Value(message) => ConfigError::Range {
            key: key.to_string(),
            message,
        },
    })?;
    c.validate()?;
    Ok(c)
}

/// One aggregate row per value of `key`, each with the same master seed.
pub fn sweep(
    config: &ScenarioConfig,
    key: &str,
    values: &[String],
    schemes: &[Scheme],
) -> Result<Vec<SweepPoint>> {
    values
        .iter()
        .map(|v| {
            let c = with_override(config, key, v)?;
            let result = run_trials(&c, schemes)?;
            Ok(SweepPoint {
                key: key.to_string(),
                value: v.clone(),
                aggregates: result.aggregates,
            })
        })
        .collect()
}
