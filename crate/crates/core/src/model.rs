//! Domain types of the edge-device prompt-generation system and the
//! closed-form latency, rate, energy and CCQ expressions.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelGains;
use crate::error::ModelError;
use crate::scalar::Scalar;

/// FLOPs, cycles per FLOP, and the CIDEr quality of the generated prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelProfile<T> {
    pub flops: T,
    pub intensity: T,
    pub quality: T,
}

impl<T: Scalar> ModelProfile<T> {
    /// Total CPU cycles of one prompt generation.
    pub fn cycles(&self) -> T {
        self.flops * self.intensity
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmitterProfile<T> {
    /// Compressed source size uploaded when offloading.
    pub source_bits: T,
    pub prompt_bits: T,
    pub device_model: ModelProfile<T>,
    pub p_max: T,
    pub f_max_local: T,
    pub kappa_eff: T,
    pub e_max: T,
}

/// Large model hosted on a server. `quality[n]` is the CIDEr obtained when
/// transmitter `n` offloads here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeModel<T> {
    pub flops: T,
    pub intensity: T,
    pub quality: Vec<T>,
}

impl<T: Scalar> EdgeModel<T> {
    pub fn cycles(&self) -> T {
        self.flops * self.intensity
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerProfile<T> {
    pub edge_model: EdgeModel<T>,
    pub p_hat_max: T,
    pub f_max_edge: T,
    pub capacity: usize,
}

/// Link-level constants shared by every rate expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Radio<T> {
    pub bandwidth: T,
    pub noise: T,
    /// Largest admissible `bits / (B * tau)`; larger exponents are reported
    /// as infeasible power demands.
    pub exponent_cap: T,
}

/// One fading block with every node's budgets and models attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRealization<T> {
    pub transmitters: Vec<TransmitterProfile<T>>,
    pub servers: Vec<ServerProfile<T>>,
    pub gains: ChannelGains<T>,
    pub radio: Radio<T>,
}

impl<T: Scalar> NetworkRealization<T> {
    pub fn num_transmitters(&self) -> usize {
        self.transmitters.len()
    }

    pub fn num_servers(&self) -> usize {
        self.servers.len()
    }

    /// Copy with every quality replaced by one, so CCQ reduces to latency.
    pub fn with_unit_quality(&self) -> Self {
        let mut out = self.clone();
        for tx in &mut out.transmitters {
            tx.device_model.quality = T::one();
        }
        for s in &mut out.servers {
            s.edge_model.quality.iter_mut().for_each(|q| *q = T::one());
        }
        out
    }

    pub fn total_capacity(&self) -> usize {
        self.servers.iter().map(|s| s.capacity).sum()
    }
}

/// Where transmitter `n` has its prompt generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Choice {
    Local,
    Offload(usize),
}

impl Choice {
    pub fn server(self) -> Option<usize> {
        match self {
            Choice::Local => None,
            Choice::Offload(k) => Some(k),
        }
    }
}

/// Offloading decision for every transmitter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Assignment(pub Vec<Choice>);

impl Assignment {
    pub fn all_local(n: usize) -> Self {
        Self(vec![Choice::Local; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn choices(&self) -> &[Choice] {
        &self.0
    }

    /// Transmitters offloaded to server `k`, in ascending order.
    pub fn members(&self, k: usize) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == Choice::Offload(k))
            .map(|(n, _)| n)
            .collect()
    }

    pub fn load(&self, k: usize) -> usize {
        self.0.iter().filter(|c| **c == Choice::Offload(k)).count()
    }

    pub fn offloaded_count(&self) -> usize {
        self.0
            .iter()
            .filter(|c| matches!(c, Choice::Offload(_)))
            .count()
    }

    /// Every server index in range and no server above its capacity.
    pub fn respects_capacity<T>(&self, servers: &[ServerProfile<T>]) -> bool {
        self.0.iter().all(|c| match c {
            Choice::Local => true,
            Choice::Offload(k) => *k < servers.len(),
        }) && servers
            .iter()
            .enumerate()
            .all(|(k, s)| self.load(k) <= s.capacity)
    }
}

/// Continuous decision of one pair. Powers are implied by the latencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PairResources<T> {
    Local { f_local: T, tau_tr: T },
    Offload { tau_up: T, f_edge: T, tau_down: T },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceAllocation<T>(pub Vec<PairResources<T>>);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairOutcome<T> {
    pub latency: T,
    pub energy: T,
    pub quality: T,
    pub ccq: T,
}

impl<T: Scalar> PairOutcome<T> {
    pub fn new(latency: T, energy: T, quality: T) -> Self {
        Self {
            latency,
            energy,
            quality,
            ccq: latency / quality,
        }
    }
}

fn require_positive<T: Scalar>(what: &'static str, v: T) -> Result<T, ModelError> {
    if v > T::zero() && v.is_finite() {
        Ok(v)
    } else {
        Err(ModelError::NonPositive {
            what,
            value: v.to_f64_lossy(),
        })
    }
}

/// `F * I / f`.
pub fn local_compute_latency<T: Scalar>(
    model: &ModelProfile<T>,
    f_local: T,
) -> Result<T, ModelError> {
    let f = require_positive("frequency", f_local)?;
    Ok(model.cycles() / f)
}

/// `kappa * F * I * f^2`.
pub fn local_compute_energy<T: Scalar>(model: &ModelProfile<T>, f_local: T, kappa_eff: T) -> T {
    kappa_eff * model.cycles() * f_local * f_local
}

/// `B * log2(1 + p * gain / noise)`.
pub fn shannon_rate<T: Scalar>(p: T, gain: T, noise: T, bandwidth: T) -> T {
    bandwidth * (p * gain / noise).ln_1p() / T::LN_2()
}

/// Transmit power that delivers `bits` in exactly `tau` seconds:
/// `(2^(bits / (B tau)) - 1) * noise / gain`.
pub fn power_from_latency<T: Scalar>(
    bits: T,
    tau: T,
    gain: T,
    noise: T,
    bandwidth: T,
    exponent_cap: T,
) -> Result<T, ModelError> {
    require_positive("latency", tau)?;
    let exponent = bits / (bandwidth * tau);
    if !(exponent <= exponent_cap) {
        return Err(ModelError::PowerDemandInfeasible {
            exponent: exponent.to_f64_lossy(),
            cap: exponent_cap.to_f64_lossy(),
        });
    }
    Ok((exponent * T::LN_2()).exp_m1() * noise / gain)
}

/// Latency at a given power: `bits / rate(p)`.
pub fn latency_from_power<T: Scalar>(bits: T, p: T, gain: T, noise: T, bandwidth: T) -> T {
    bits / shannon_rate(p, gain, noise, bandwidth)
}

/// Gain and bit count of the link a pair uses for its transmission(s).
impl<T: Scalar> NetworkRealization<T> {
    pub fn power(&self, bits: T, tau: T, gain: T) -> Result<T, ModelError> {
        power_from_latency(
            bits,
            tau,
            gain,
            self.radio.noise,
            self.radio.bandwidth,
            self.radio.exponent_cap,
        )
    }

    /// Quality of transmitter `n` under `choice`.
    pub fn quality(&self, n: usize, choice: Choice) -> T {
        match choice {
            Choice::Local => self.transmitters[n].device_model.quality,
            Choice::Offload(k) => self.servers[k].edge_model.quality[n],
        }
    }
}

/// Latency, transmitter-side energy, quality and CCQ of pair `n`.
pub fn pair_outcome<T: Scalar>(
    n: usize,
    choice: Choice,
    resources: &PairResources<T>,
    net: &NetworkRealization<T>,
) -> Result<PairOutcome<T>, ModelError> {
    let tx = &net.transmitters[n];
    match (choice, *resources) {
        (Choice::Local, PairResources::Local { f_local, tau_tr }) => {
            let compute = local_compute_latency(&tx.device_model, f_local)?;
            let p = net.power(tx.prompt_bits, tau_tr, net.gains.direct[n])?;
            let energy = local_compute_energy(&tx.device_model, f_local, tx.kappa_eff) + p * tau_tr;
            Ok(PairOutcome::new(
                compute + tau_tr,
                energy,
                tx.device_model.quality,
            ))
        }
        (
            Choice::Offload(k),
            PairResources::Offload {
                tau_up,
                f_edge,
                tau_down,
            },
        ) => {
            let server = &net.servers[k];
            let f = require_positive("edge frequency", f_edge)?;
            require_positive("downlink latency", tau_down)?;
            let p = net.power(tx.source_bits, tau_up, net.gains.up[n][k])?;
            let latency = tau_up + server.edge_model.cycles() / f + tau_down;
            Ok(PairOutcome::new(
                latency,
                p * tau_up,
                server.edge_model.quality[n],
            ))
        }
        _ => Err(ModelError::NonPositive {
            what: "resource kind matching the choice",
            value: f64::NAN,
        }),
    }
}

/// Outcomes of every pair, in transmitter order.
pub fn evaluate<T: Scalar>(
    assignment: &Assignment,
    resources: &ResourceAllocation<T>,
    net: &NetworkRealization<T>,
) -> Result<Vec<PairOutcome<T>>, ModelError> {
    assignment
        .choices()
        .iter()
        .zip(&resources.0)
        .enumerate()
        .map(|(n, (c, r))| pair_outcome(n, *c, r, net))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constraint {
    /// Resource entry kind/positivity and power-demand admissibility.
    WellFormed(usize),
    TxPower(usize),
    LocalFrequency(usize),
    Energy(usize),
    ServerFrequency(usize),
    ServerPower(usize),
    Capacity(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub constraint: Constraint,
    /// `limit - value`; negative when violated.
    pub slack: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub checks: Vec<ConstraintCheck>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.checks.iter().all(|c| c.satisfied)
    }

    pub fn violations(&self) -> impl Iterator<Item = &ConstraintCheck> {
        self.checks.iter().filter(|c| !c.satisfied)
    }

    pub fn find(&self, constraint: Constraint) -> Option<&ConstraintCheck> {
        self.checks.iter().find(|c| c.constraint == constraint)
    }

    fn push_le(&mut self, constraint: Constraint, value: f64, limit: f64, rel_tol: f64) {
        let slack = limit - value;
        let satisfied = value.is_finite() && value <= limit + rel_tol * limit.abs();
        self.checks.push(ConstraintCheck {
            constraint,
            slack,
            satisfied,
        });
    }

    fn push_fail(&mut self, constraint: Constraint) {
        self.checks.push(ConstraintCheck {
            constraint,
            slack: f64::NEG_INFINITY,
            satisfied: false,
        });
    }
}

/// Relative tolerance applied to every `value <= limit` comparison.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

/// Verifies capacity, power, frequency and energy constraints of the joint
/// problem for a concrete allocation.
pub fn check_feasible<T: Scalar>(
    assignment: &Assignment,
    resources: &ResourceAllocation<T>,
    net: &NetworkRealization<T>,
) -> FeasibilityReport {
    let tol = FEASIBILITY_TOLERANCE;
    let mut report = FeasibilityReport::default();
    let k_count = net.num_servers();
    let mut f_sum = vec![0.0f64; k_count];
    let mut p_sum = vec![0.0f64; k_count];

    for (n, tx) in net.transmitters.iter().enumerate() {
        let choice = assignment.0.get(n).copied();
        let res = resources.0.get(n).copied();
        match (choice, res) {
            (Some(Choice::Local), Some(PairResources::Local { f_local, tau_tr })) => {
                let p = net.power(tx.prompt_bits, tau_tr, net.gains.direct[n]);
                let (Ok(p), true) = (p, f_local > T::zero() && f_local.is_finite()) else {
                    report.push_fail(Constraint::WellFormed(n));
                    continue;
                };
                let p = p.to_f64_lossy();
                let tau = tau_tr.to_f64_lossy();
                let ec =
                    local_compute_energy(&tx.device_model, f_local, tx.kappa_eff).to_f64_lossy();
                report.push_le(Constraint::TxPower(n), p, tx.p_max.to_f64_lossy(), tol);
                report.push_le(
                    Constraint::LocalFrequency(n),
                    f_local.to_f64_lossy(),
                    tx.f_max_local.to_f64_lossy(),
                    tol,
                );
                report.push_le(
                    Constraint::Energy(n),
                    ec + p * tau,
                    tx.e_max.to_f64_lossy(),
                    tol,
                );
            }
            (
                Some(Choice::Offload(k)),
                Some(PairResources::Offload {
                    tau_up,
                    f_edge,
                    tau_down,
                }),
            ) if k < k_count => {
                let up = net.power(tx.source_bits, tau_up, net.gains.up[n][k]);
                let down = net.power(tx.prompt_bits, tau_down, net.gains.down[k][n]);
                let (Ok(p_up), Ok(p_down), true) =
                    (up, down, f_edge > T::zero() && f_edge.is_finite())
                else {
                    report.push_fail(Constraint::WellFormed(n));
                    continue;
                };
                let p_up = p_up.to_f64_lossy();
                report.push_le(Constraint::TxPower(n), p_up, tx.p_max.to_f64_lossy(), tol);
                report.push_le(
                    Constraint::Energy(n),
                    p_up * tau_up.to_f64_lossy(),
                    tx.e_max.to_f64_lossy(),
                    tol,
                );
                f_sum[k] += f_edge.to_f64_lossy();
                p_sum[k] += p_down.to_f64_lossy();
            }
            _ => report.push_fail(Constraint::WellFormed(n)),
        }
    }
    for (k, s) in net.servers.iter().enumerate() {
        report.push_le(
            Constraint::ServerFrequency(k),
            f_sum[k],
            s.f_max_edge.to_f64_lossy(),
            tol,
        );
        report.push_le(
            Constraint::ServerPower(k),
            p_sum[k],
            s.p_hat_max.to_f64_lossy(),
            tol,
        );
        report.push_le(
            Constraint::Capacity(k),
            assignment.load(k) as f64,
            s.capacity as f64,
            0.0,
        );
    }
    report
}
