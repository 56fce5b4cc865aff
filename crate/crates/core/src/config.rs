//! Scenario configuration and its flat `dotted.key = value` file format.
//!
//! Every key has a default; an empty file yields the reference scenario
//! (N = K = 4 pairs/servers, capacity 3, B = 2 MHz, -174 dBm/Hz, ...).
//! Powers are written in dBm and stored in watts; everything else is SI.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::dbm_to_watts;
use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    pub bandwidth_hz: f64,
    pub noise_psd_dbm_per_hz: f64,
    pub tx_power_max_w: f64,
    pub server_power_max_w: f64,
    pub path_loss_reference_m: f64,
    pub path_loss_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeConfig {
    pub intensity_cycles_per_flop: f64,
    pub local_freq_min_hz: f64,
    pub local_freq_max_hz: f64,
    pub edge_freq_min_hz: f64,
    pub edge_freq_max_hz: f64,
    pub capacitance: f64,
    pub energy_budget_j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskConfig {
    pub source_bits: f64,
    /// Prompt size in bits; also selects the quality column.
    pub prompt_bits: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryConfig {
    pub servers: Disc,
    pub transmitters: Disc,
    pub receivers: Disc,
}

/// FLOPs and per-prompt-length CIDEr of one model architecture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub flops: f64,
    pub quality: BTreeMap<u32, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub device_pool: Vec<String>,
    pub edge_pool: Vec<String>,
    pub architectures: BTreeMap<String, Architecture>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub phi_tolerance: f64,
    /// Relative to each server's frequency budget.
    pub dual_tolerance: f64,
    pub scalar_tolerance: f64,
    pub max_iterations: usize,
    pub exponent_cap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingConfig {
    pub restarts: usize,
    pub enumeration_cap: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub transmitters: usize,
    pub servers: usize,
    pub server_capacity: usize,
    pub radio: RadioConfig,
    pub compute: ComputeConfig,
    pub task: TaskConfig,
    pub geometry: GeometryConfig,
    pub models: ModelConfig,
    pub solver: SolverConfig,
    pub matching: MatchingConfig,
    pub experiment: ExperimentConfig,
}

fn table_one() -> BTreeMap<String, Architecture> {
    let arch = |flops: f64, q400: f64, q600: f64| Architecture {
        flops,
        quality: BTreeMap::from([(400, q400), (600, q600)]),
    };
    BTreeMap::from([
        ("S/16".to_string(), arch(9.2e9, 57.1, 65.9)),
        ("M/16".to_string(), arch(16.0e9, 62.0, 71.4)),
        ("B/16".to_string(), arch(35.1e9, 69.3, 80.5)),
        ("L/14".to_string(), arch(161.8e9, 76.6, 89.3)),
    ])
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            transmitters: 4,
            servers: 4,
            server_capacity: 3,
            radio: RadioConfig {
                bandwidth_hz: 2e6,
                noise_psd_dbm_per_hz: -174.0,
                tx_power_max_w: dbm_to_watts(20.0),
                server_power_max_w: dbm_to_watts(30.0),
                path_loss_reference_m: 10.0,
                path_loss_exponent: 2.7,
            },
            compute: ComputeConfig {
                intensity_cycles_per_flop: 0.01,
                local_freq_min_hz: 3e9,
                local_freq_max_hz: 6e9,
                edge_freq_min_hz: 11e9,
                edge_freq_max_hz: 14e9,
                capacitance: 1e-27,
                energy_budget_j: 0.9,
            },
            task: TaskConfig {
                source_bits: 2e4,
                prompt_bits: 400,
            },
            geometry: GeometryConfig {
                servers: Disc {
                    center: [250.0, 250.0],
                    radius: 200.0,
                },
                transmitters: Disc {
                    center: [0.0, 0.0],
                    radius: 100.0,
                },
                receivers: Disc {
                    center: [0.0, 400.0],
                    radius: 100.0,
                },
            },
            models: ModelConfig {
                device_pool: vec!["S/16".into(), "M/16".into()],
                edge_pool: vec!["B/16".into(), "L/14".into()],
                architectures: table_one(),
            },
            solver: SolverConfig {
                phi_tolerance: 1e-4,
                dual_tolerance: 1e-6,
                scalar_tolerance: 1e-6,
                max_iterations: 200,
                exponent_cap: 60.0,
            },
            matching: MatchingConfig {
                restarts: 1,
                enumeration_cap: 4096,
            },
            experiment: ExperimentConfig {
                trials: 200,
                seed: 1,
            },
        }
    }
}

/// Failure of a single `set` call, before line information is attached.
#[derive(Debug, Clone, PartialEq)]
pub enum SetError {
    UnknownKey,
    Value(String),
}

fn num(v: &str) -> Result<f64, SetError> {
    let v = v.trim();
    v.parse::<f64>()
        .map_err(|_| SetError::Value(format!("expected a number, got `{v}`")))
}

fn int<I: std::str::FromStr>(v: &str) -> Result<I, SetError> {
    let v = v.trim();
    v.parse::<I>()
        .map_err(|_| SetError::Value(format!("expected a non-negative integer, got `{v}`")))
}

fn strip_brackets(v: &str) -> &str {
    let v = v.trim();
    let v = v
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .or_else(|| v.strip_prefix('(').and_then(|s| s.strip_suffix(')')))
        .unwrap_or(v);
    v.trim()
}

fn point(v: &str) -> Result<[f64; 2], SetError> {
    let parts: Vec<&str> = strip_brackets(v).split(',').collect();
    match parts.as_slice() {
        [x, y] => Ok([num(x)?, num(y)?]),
        _ => Err(SetError::Value(format!(
            "expected `x, y`, got `{}`",
            v.trim()
        ))),
    }
}

fn string_list(v: &str) -> Result<Vec<String>, SetError> {
    let items: Vec<String> = strip_brackets(v)
        .split(',')
        .map(|s| s.trim().trim_matches('"').to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(SetError::Value("expected a non-empty list".into()));
    }
    Ok(items)
}

impl ScenarioConfig {
    /// Assigns one dotted key from its textual value.
    ///
    /// `f_max_local` is a shorthand that pins every transmitter's local
    /// frequency budget to the given value in Hz.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), SetError> {
        let c = &mut self.compute;
        let r = &mut self.radio;
        let g = &mut self.geometry;
        match key {
            "network.transmitters" => self.transmitters = int(value)?,
            "network.servers" => self.servers = int(value)?,
            "network.server_capacity" => self.server_capacity = int(value)?,
            "radio.bandwidth_hz" => r.bandwidth_hz = num(value)?,
            "radio.noise_psd_dbm_per_hz" => r.noise_psd_dbm_per_hz = num(value)?,
            "radio.tx_power_max_dbm" => r.tx_power_max_w = dbm_to_watts(num(value)?),
            "radio.server_power_max_dbm" => r.server_power_max_w = dbm_to_watts(num(value)?),
            "radio.path_loss_reference_m" => r.path_loss_reference_m = num(value)?,
            "radio.path_loss_exponent" => r.path_loss_exponent = num(value)?,
            "compute.intensity_cycles_per_flop" => c.intensity_cycles_per_flop = num(value)?,
            "compute.local_freq_min_hz" => c.local_freq_min_hz = num(value)?,
            "compute.local_freq_max_hz" => c.local_freq_max_hz = num(value)?,
            "compute.edge_freq_min_hz" => c.edge_freq_min_hz = num(value)?,
            "compute.edge_freq_max_hz" => c.edge_freq_max_hz = num(value)?,
            "compute.capacitance" => c.capacitance = num(value)?,
            "compute.energy_budget_j" => c.energy_budget_j = num(value)?,
            "f_max_local" => {
                let f = num(value)?;
                c.local_freq_min_hz = f;
                c.local_freq_max_hz = f;
            }
            "task.source_bits" => self.task.source_bits = num(value)?,
            "task.prompt_bits" => self.task.prompt_bits = int(value)?,
            "geometry.servers.center" => g.servers.center = point(value)?,
            "geometry.servers.radius_m" => g.servers.radius = num(value)?,
            "geometry.transmitters.center" | "geometry.tx.center" => g.transmitters.center = point(value)?,
            "geometry.transmitters.radius_m" | "geometry.tx.radius_m" => g.transmitters.radius = num(value)?,
            "geometry.receivers.center" | "geometry.rx.center" => g.receivers.center = point(value)?,
            "geometry.receivers.radius_m" | "geometry.rx.radius_m" => g.receivers.radius = num(value)?,
            "models.device_pool" => self.models.device_pool = string_list(value)?,
            "models.edge_pool" => self.models.edge_pool = string_list(value)?,
            "solver.phi_tolerance" => self.solver.phi_tolerance = num(value)?,
            "solver.dual_tolerance" => self.solver.dual_tolerance = num(value)?,
            "solver.scalar_tolerance" => self.solver.scalar_tolerance = num(value)?,
            "solver.max_iterations" => self.solver.max_iterations = int(value)?,
            "solver.exponent_cap" => self.solver.exponent_cap = num(value)?,
            "matching.restarts" => self.matching.restarts = int(value)?,
            "matching.enumeration_cap" => self.matching.enumeration_cap = int(value)?,
            "experiment.trials" => self.experiment.trials = int(value)?,
            "experiment.seed" => self.experiment.seed = int(value)?,
            _ => return self.set_model_table(key, value),
        }
        Ok(())
    }

    /// `models.flops.<ARCH>` and `models.quality.<ARCH>.<PROMPT_BITS>`.
    fn set_model_table(&mut self, key: &str, value: &str) -> Result<(), SetError> {
        let blank = || Architecture {
            flops: 0.0,
            quality: BTreeMap::new(),
        };
        if let Some(arch) = key.strip_prefix("models.flops.") {
            if arch.is_empty() {
                return Err(SetError::UnknownKey);
            }
            let flops = num(value)?;
            self.models
                .architectures
                .entry(arch.to_string())
                .or_insert_with(blank)
                .flops = flops;
            return Ok(());
        }
        if let Some(rest) = key.strip_prefix("models.quality.") {
            let (arch, bits) = rest.rsplit_once('.').ok_or(SetError::UnknownKey)?;
            let bits: u32 = bits.parse().map_err(|_| SetError::UnknownKey)?;
            if arch.is_empty() {
                return Err(SetError::UnknownKey);
            }
            let q = num(value)?;
            self.models
                .architectures
                .entry(arch.to_string())
                .or_insert_with(blank)
                .quality
                .insert(bits, q);
            return Ok(());
        }
        Err(SetError::UnknownKey)
    }

    /// Checks every range constraint; returns the first violation.
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::Range {
                    key: key.into(),
                    message: format!("must be positive and finite, got {v}"),
                })
            }
        }
        let range = |key: &str, message: String| ConfigError::Range {
            key: key.into(),
            message,
        };
        if self.transmitters == 0 {
            return Err(range("network.transmitters", "must be at least 1".into()));
        }
        if self.servers == 0 {
            return Err(range("network.servers", "must be at least 1".into()));
        }
        if self.server_capacity == 0 {
            return Err(range(
                "network.server_capacity",
                "must be at least 1".into(),
            ));
        }
        let r = &self.radio;
        positive("radio.bandwidth_hz", r.bandwidth_hz)?;
        if !r.noise_psd_dbm_per_hz.is_finite() {
            return Err(range("radio.noise_psd_dbm_per_hz", "must be finite".into()));
        }
        positive("radio.tx_power_max_dbm", r.tx_power_max_w)?;
        positive("radio.server_power_max_dbm", r.server_power_max_w)?;
        positive("radio.path_loss_reference_m", r.path_loss_reference_m)?;
        positive("radio.path_loss_exponent", r.path_loss_exponent)?;
        let c = &self.compute;
        positive(
            "compute.intensity_cycles_per_flop",
            c.intensity_cycles_per_flop,
        )?;
        positive("compute.local_freq_min_hz", c.local_freq_min_hz)?;
        positive("compute.local_freq_max_hz", c.local_freq_max_hz)?;
        positive("compute.edge_freq_min_hz", c.edge_freq_min_hz)?;
        positive("compute.edge_freq_max_hz", c.edge_freq_max_hz)?;
        if c.local_freq_min_hz > c.local_freq_max_hz {
            return Err(range(
                "compute.local_freq_min_hz",
                "exceeds local_freq_max_hz".into(),
            ));
        }
        if c.edge_freq_min_hz > c.edge_freq_max_hz {
            return Err(range(
                "compute.edge_freq_min_hz",
                "exceeds edge_freq_max_hz".into(),
            ));
        }
        positive("compute.capacitance", c.capacitance)?;
        positive("compute.energy_budget_j", c.energy_budget_j)?;
        positive("task.source_bits", self.task.source_bits)?;
        if self.task.prompt_bits == 0 {
            return Err(range("task.prompt_bits", "must be at least 1".into()));
        }
        if self.task.source_bits <= f64::from(self.task.prompt_bits) {
            return Err(range(
                "task.source_bits",
                "must exceed task.prompt_bits".into(),
            ));
        }
        for (name, d) in [
            ("geometry.servers", &self.geometry.servers),
            ("geometry.transmitters", &self.geometry.transmitters),
            ("geometry.receivers", &self.geometry.receivers),
        ] {
            if !(d.radius.is_finite() && d.radius >= 0.0) {
                return Err(range(
                    &format!("{name}.radius_m"),
                    "must be non-negative".into(),
                ));
            }
            if !d.center.iter().all(|v| v.is_finite()) {
                return Err(range(&format!("{name}.center"), "must be finite".into()));
            }
        }
        for (key, pool) in [
            ("models.device_pool", &self.models.device_pool),
            ("models.edge_pool", &self.models.edge_pool),
        ] {
            if pool.is_empty() {
                return Err(range(key, "must not be empty".into()));
            }
            for arch in pool {
                let spec = self.models.architectures.get(arch).ok_or_else(|| {
                    range(
                        key,
                        format!("architecture `{arch}` has no flops/quality entries"),
                    )
                })?;
                positive(&format!("models.flops.{arch}"), spec.flops)?;
                let bits = self.task.prompt_bits;
                let q = spec.quality.get(&bits).copied().ok_or_else(|| {
                    range(
                        &format!("models.quality.{arch}.{bits}"),
                        format!("no quality entry for ({arch}, {bits} bits)"),
                    )
                })?;
                positive(&format!("models.quality.{arch}.{bits}"), q)?;
            }
        }
        let s = &self.solver;
        positive("solver.phi_tolerance", s.phi_tolerance)?;
        positive("solver.dual_tolerance", s.dual_tolerance)?;
        positive("solver.scalar_tolerance", s.scalar_tolerance)?;
        positive("solver.exponent_cap", s.exponent_cap)?;
        if s.max_iterations == 0 {
            return Err(range("solver.max_iterations", "must be at least 1".into()));
        }
        if self.matching.restarts == 0 {
            return Err(range("matching.restarts", "must be at least 1".into()));
        }
        if self.experiment.trials == 0 {
            return Err(range("experiment.trials", "must be at least 1".into()));
        }
        Ok(())
    }

    /// Parses a configuration text on top of the defaults.
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut config = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Parse {
                    line,
                    message: "empty key or value".into(),
                });
            }
            config.set(key, value).map_err(|e| match e {
                SetError::UnknownKey => ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                },
                SetError::Value(message) => ConfigError::Parse {
                    line,
                    message: format!("`{key}`: {message}"),
                },
            })?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn total_capacity(&self) -> usize {
        self.servers * self.server_capacity
    }
}

/// Reads and validates a configuration file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ScenarioConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Missing {
        path: path.display().to_string(),
        source,
    })?;
    ScenarioConfig::from_text(&text)
}
