//! Continuous resource allocation for a fixed offloading assignment.
//!
//! The min-max CCQ problem splits into independent pieces: every local pair
//! only touches its own power, frequency and energy, and every server group
//! shares one frequency budget and one downlink power budget. The global
//! optimum is the maximum of the per-piece optima.
//!
//! * Local pairs: golden-section search over the share of the energy budget
//!   spent on computation. Frequency and prompt latency follow in closed
//!   form / by bisection.
//! * Server groups: bisection on the common CCQ level `phi`. For a candidate
//!   `phi` every user gets a deadline `phi * Q'`; the uplink is fixed at its
//!   minimum latency and the frequency budget is dualized, so each user
//!   solves a strictly convex 1-D problem in its downlink latency. An outer
//!   bisection on the multiplier fills the frequency budget, after which the
//!   level is feasible iff the downlink powers fit the power budget.

use serde::{Deserialize, Serialize};

use crate::config::SolverConfig;
use crate::model::{
    latency_from_power, Assignment, Choice, NetworkRealization, PairOutcome, PairResources, Radio,
    ResourceAllocation, TransmitterProfile,
};
use crate::scalar::Scalar;
use crate::search::{bisect_threshold, golden_section, increasing_root};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings<T> {
    /// Relative width at which the `phi` bisection stops.
    pub phi_tolerance: T,
    /// Frequency-budget matching tolerance, relative to the server budget.
    pub dual_tolerance: T,
    pub max_iterations: usize,
    pub scalar_search_tolerance: T,
}

impl<T: Scalar> Default for SolverSettings<T> {
    fn default() -> Self {
        Self {
            phi_tolerance: T::lit(1e-4),
            dual_tolerance: T::lit(1e-6),
            max_iterations: 200,
            scalar_search_tolerance: T::lit(1e-6),
        }
    }
}

impl<T: Scalar> SolverSettings<T> {
    pub fn from_config(c: &SolverConfig) -> Self {
        Self {
            phi_tolerance: T::lit(c.phi_tolerance),
            dual_tolerance: T::lit(c.dual_tolerance),
            max_iterations: c.max_iterations,
            scalar_search_tolerance: T::lit(c.scalar_tolerance),
        }
    }

    /// Relative tolerance of root-finding bisections.
    fn root_tolerance(&self) -> T {
        T::lit(1e-12).max(T::epsilon() * T::lit(8.0))
    }
}

/// Budget that made a subproblem infeasible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Budget {
    Time,
    Frequency,
    Power,
    Energy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Culprit {
    Local(usize),
    Server(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible { culprit: Culprit, budget: Budget },
}

/// Optimal allocation for one assignment. When infeasible, `utility` is
/// `+inf` and `resources`/`outcomes` are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerSolution<T> {
    pub resources: ResourceAllocation<T>,
    pub outcomes: Vec<PairOutcome<T>>,
    pub utility: T,
    pub status: SolveStatus,
}

impl<T: Scalar> InnerSolution<T> {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn infeasible(culprit: Culprit, budget: Budget) -> Self {
        Self {
            resources: ResourceAllocation(Vec::new()),
            outcomes: Vec::new(),
            utility: T::infinity(),
            status: SolveStatus::Infeasible { culprit, budget },
        }
    }
}

/// A point-to-point link carrying a fixed payload.
#[derive(Debug, Clone, Copy)]
struct Link<T> {
    bits: T,
    gain: T,
    radio: Radio<T>,
}

impl<T: Scalar> Link<T> {
    fn new(bits: T, gain: T, radio: &Radio<T>) -> Self {
        Self {
            bits,
            gain,
            radio: *radio,
        }
    }

    fn exponent(&self, tau: T) -> T {
        self.bits / (self.radio.bandwidth * tau)
    }

    /// Shortest latency whose power demand stays inside the exponent cap.
    fn min_admissible_latency(&self) -> T {
        self.bits / (self.radio.bandwidth * self.radio.exponent_cap)
    }

    fn power(&self, tau: T) -> T {
        if !(tau > T::zero()) || self.exponent(tau) > self.radio.exponent_cap {
            return T::infinity();
        }
        (self.exponent(tau) * T::LN_2()).exp_m1() * self.radio.noise / self.gain
    }

    /// `d p / d tau`, always negative.
    fn power_slope(&self, tau: T) -> T {
        let x = self.exponent(tau);
        -(x * T::LN_2()).exp() * T::LN_2() * x / tau * self.radio.noise / self.gain
    }

    fn energy(&self, tau: T) -> T {
        self.power(tau) * tau
    }

    /// Infimum of `p(tau) * tau` as `tau -> inf`; never attained.
    fn energy_floor(&self) -> T {
        self.bits * T::LN_2() * self.radio.noise / (self.radio.bandwidth * self.gain)
    }

    /// Latency at full power `p_max`, never below the admissible minimum.
    fn latency_at_power(&self, p_max: T) -> T {
        latency_from_power(
            self.bits,
            p_max,
            self.gain,
            self.radio.noise,
            self.radio.bandwidth,
        )
        .max(self.min_admissible_latency())
    }

    /// Smallest latency with `p(tau) <= p_max` and `p(tau) * tau <= energy`.
    fn min_latency(&self, p_max: T, energy: T, settings: &SolverSettings<T>) -> Result<T, Budget> {
        let tau_power = self.latency_at_power(p_max);
        if energy.is_infinite() {
            return Ok(tau_power);
        }
        if !(energy > self.energy_floor()) {
            return Err(Budget::Energy);
        }
        if self.energy(tau_power) <= energy {
            return Ok(tau_power);
        }
        let mut hi = tau_power;
        let mut doublings = 0;
        while !(self.energy(hi) <= energy) {
            hi = hi + hi;
            doublings += 1;
            if doublings > 4 * settings.max_iterations.max(64) || hi.is_infinite() {
                return Err(Budget::Energy);
            }
        }
        Ok(bisect_threshold(
            |t| self.energy(t) <= energy,
            tau_power,
            hi,
            settings.root_tolerance(),
            settings.max_iterations.max(200),
        ))
    }
}

/// Optimum of one on-device pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalSolution<T> {
    pub f_local: T,
    pub tau_tr: T,
    pub outcome: PairOutcome<T>,
}

/// Minimizes `(F I / f + tau_tr) / Q` for a pair generating its prompt on
/// the device, under its power, frequency and energy budgets.
pub fn solve_local_pair<T: Scalar>(
    tx: &TransmitterProfile<T>,
    gain_direct: T,
    radio: &Radio<T>,
    settings: &SolverSettings<T>,
) -> Result<LocalSolution<T>, Budget> {
    let link = Link::new(tx.prompt_bits, gain_direct, radio);
    let cycles = tx.device_model.cycles();
    let floor = link.energy_floor();
    if !(tx.e_max > floor) {
        return Err(Budget::Energy);
    }
    let per_cycle_sq = tx.kappa_eff * cycles;
    let freq_at = |e_c: T| tx.f_max_local.min((e_c / per_cycle_sq).sqrt());
    let latency_at = |e_c: T| -> T {
        let f = freq_at(e_c);
        if !(f > T::zero()) {
            return T::infinity();
        }
        match link.min_latency(tx.p_max, tx.e_max - e_c, settings) {
            Ok(tau) => cycles / f + tau,
            Err(_) => T::infinity(),
        }
    };
    let e_full_speed = per_cycle_sq * tx.f_max_local * tx.f_max_local;
    let upper = e_full_speed.min(tx.e_max - floor);
    let (mut e_best, mut best) = golden_section(
        latency_at,
        T::zero(),
        upper,
        settings.scalar_search_tolerance,
        settings.max_iterations.max(100),
    );
    let at_upper = latency_at(upper);
    if at_upper <= best {
        e_best = upper;
        best = at_upper;
    }
    if !best.is_finite() {
        return Err(Budget::Energy);
    }
    let f_local = freq_at(e_best);
    let tau_tr = link
        .min_latency(tx.p_max, tx.e_max - e_best, settings)
        .map_err(|_| Budget::Energy)?;
    let energy = per_cycle_sq * f_local * f_local + link.energy(tau_tr);
    Ok(LocalSolution {
        f_local,
        tau_tr,
        outcome: PairOutcome::new(cycles / f_local + tau_tr, energy, tx.device_model.quality),
    })
}

/// Shortest uplink latency for offloading the source of `tx`, limited by
/// its peak power and its energy budget.
pub fn min_uplink_latency<T: Scalar>(
    tx: &TransmitterProfile<T>,
    gain_up: T,
    radio: &Radio<T>,
    settings: &SolverSettings<T>,
) -> Result<T, Budget> {
    Link::new(tx.source_bits, gain_up, radio).min_latency(tx.p_max, tx.e_max, settings)
}

/// Per-user split produced for a server group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupShare<T> {
    pub tau_up: T,
    pub f_edge: T,
    pub tau_down: T,
    pub p_down: T,
}

/// Result of testing one set of deadlines against a server's budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupCheck<T> {
    pub verdict: Result<(), Budget>,
    pub shares: Vec<GroupShare<T>>,
    pub power_sum: T,
    pub frequency_sum: T,
    /// Multiplier of the frequency budget at the returned split.
    pub multiplier: T,
}

impl<T: Scalar> GroupCheck<T> {
    pub fn feasible(&self) -> bool {
        self.verdict.is_ok()
    }

    fn fail(budget: Budget) -> Self {
        Self {
            verdict: Err(budget),
            shares: Vec::new(),
            power_sum: T::infinity(),
            frequency_sum: T::infinity(),
            multiplier: T::nan(),
        }
    }
}

struct DownlinkUser<T> {
    link: Link<T>,
    tau_up: T,
    /// Time left for edge computation plus downlink.
    remaining: T,
    cycles: T,
}

impl<T: Scalar> DownlinkUser<T> {
    /// Minimizer of `p(tau) + mu * cycles / (remaining - tau)`.
    fn best_downlink(&self, mu: T, settings: &SolverSettings<T>) -> T {
        let lo = self.link.min_admissible_latency();
        let slope = |tau: T| {
            let slack = self.remaining - tau;
            self.link.power_slope(tau) + mu * self.cycles / (slack * slack)
        };
        increasing_root(slope, lo, self.remaining, settings.root_tolerance(), 400)
    }

    fn frequency(&self, tau_down: T) -> T {
        self.cycles / (self.remaining - tau_down)
    }
}

/// Decides whether every member of server `k` can finish within its
/// deadline while sharing the server's frequency and power budgets.
pub fn server_group_feasible<T: Scalar>(
    net: &NetworkRealization<T>,
    k: usize,
    users: &[usize],
    deadlines: &[T],
    settings: &SolverSettings<T>,
) -> GroupCheck<T> {
    let server = &net.servers[k];
    let cycles = server.edge_model.cycles();
    let mut members = Vec::with_capacity(users.len());
    for (&n, &deadline) in users.iter().zip(deadlines) {
        let tx = &net.transmitters[n];
        let tau_up = match min_uplink_latency(tx, net.gains.up[n][k], &net.radio, settings) {
            Ok(t) => t,
            Err(b) => return GroupCheck::fail(b),
        };
        let link = Link::new(tx.prompt_bits, net.gains.down[k][n], &net.radio);
        let remaining = deadline - tau_up;
        if !(remaining > link.min_admissible_latency()) || !(deadline > T::epsilon()) {
            return GroupCheck::fail(Budget::Time);
        }
        members.push(DownlinkUser {
            link,
            tau_up,
            remaining,
            cycles,
        });
    }
    let budget = server.f_max_edge;
    let fastest: T = members
        .iter()
        .map(|u| u.frequency(u.link.min_admissible_latency()))
        .fold(T::zero(), |a, b| a + b);
    if !(fastest <= budget) {
        return GroupCheck::fail(Budget::Frequency);
    }

    let taus_at = |mu: T| -> Vec<T> {
        members
            .iter()
            .map(|u| u.best_downlink(mu, settings))
            .collect()
    };
    let freq_sum = |taus: &[T]| -> T {
        members
            .iter()
            .zip(taus)
            .map(|(u, &t)| u.frequency(t))
            .fold(T::zero(), |a, b| a + b)
    };

    // Bracket the multiplier: frequency use falls as mu grows.
    let step = T::lit(1e4);
    let tiny = T::min_positive_value().sqrt();
    let huge = T::max_value().sqrt();
    let mut hi = T::one();
    let mut taus_hi = taus_at(hi);
    while !(freq_sum(&taus_hi) <= budget) && hi < huge {
        hi = hi * step;
        taus_hi = taus_at(hi);
    }
    if !(freq_sum(&taus_hi) <= budget) {
        // Only the admissible-latency floor fits; it was checked above.
        taus_hi = members
            .iter()
            .map(|u| u.link.min_admissible_latency())
            .collect();
    }
    let mut lo = hi;
    while freq_sum(&taus_at(lo)) <= budget && lo > tiny {
        lo = lo / step;
    }
    let tol = settings.dual_tolerance * budget;
    for _ in 0..settings.max_iterations {
        if budget - freq_sum(&taus_hi) <= tol {
            break;
        }
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        let taus = taus_at(mid);
        if freq_sum(&taus) <= budget {
            hi = mid;
            taus_hi = taus;
        } else {
            lo = mid;
        }
    }

    let shares: Vec<GroupShare<T>> = members
        .iter()
        .zip(&taus_hi)
        .map(|(u, &tau_down)| GroupShare {
            tau_up: u.tau_up,
            f_edge: u.frequency(tau_down),
            tau_down,
            p_down: u.link.power(tau_down),
        })
        .collect();
    let power_sum = shares
        .iter()
        .map(|s| s.p_down)
        .fold(T::zero(), |a, b| a + b);
    let frequency_sum = shares
        .iter()
        .map(|s| s.f_edge)
        .fold(T::zero(), |a, b| a + b);
    let verdict = if power_sum <= server.p_hat_max {
        Ok(())
    } else {
        Err(Budget::Power)
    };
    GroupCheck {
        verdict,
        shares,
        power_sum,
        frequency_sum,
        multiplier: hi,
    }
}

/// Min-max CCQ allocation of one server group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSolution<T> {
    pub users: Vec<usize>,
    pub shares: Vec<GroupShare<T>>,
    pub outcomes: Vec<PairOutcome<T>>,
    /// Feasible CCQ level found by the bisection.
    pub phi: T,
    /// Largest level known to be infeasible (the solo lower bound when the
    /// bisection never ran).
    pub phi_infeasible: T,
}

impl<T: Scalar> GroupSolution<T> {
    pub fn utility(&self) -> T {
        self.outcomes.iter().map(|o| o.ccq).fold(T::zero(), T::max)
    }
}

/// Bisection on the common CCQ level of the transmitters offloaded to `k`.
pub fn solve_server_group<T: Scalar>(
    net: &NetworkRealization<T>,
    k: usize,
    users: &[usize],
    settings: &SolverSettings<T>,
) -> Result<GroupSolution<T>, Budget> {
    let server = &net.servers[k];
    let cycles = server.edge_model.cycles();
    let quality: Vec<T> = users
        .iter()
        .map(|&n| server.edge_model.quality[n])
        .collect();
    let outcomes_of = |shares: &[GroupShare<T>]| -> Vec<PairOutcome<T>> {
        shares
            .iter()
            .zip(users)
            .zip(&quality)
            .map(|((s, &n), &q)| {
                let tx = &net.transmitters[n];
                let up = Link::new(tx.source_bits, net.gains.up[n][k], &net.radio);
                let latency = s.tau_up + cycles / s.f_edge + s.tau_down;
                PairOutcome::new(latency, up.energy(s.tau_up), q)
            })
            .collect()
    };

    if users.is_empty() {
        return Ok(GroupSolution {
            users: Vec::new(),
            shares: Vec::new(),
            outcomes: Vec::new(),
            phi: T::zero(),
            phi_infeasible: T::zero(),
        });
    }

    // Each user alone with the whole server: a lower bound on the level.
    let mut solo = Vec::with_capacity(users.len());
    for &n in users {
        let tx = &net.transmitters[n];
        let tau_up = min_uplink_latency(tx, net.gains.up[n][k], &net.radio, settings)?;
        let down = Link::new(tx.prompt_bits, net.gains.down[k][n], &net.radio);
        let tau_down = down.latency_at_power(server.p_hat_max);
        solo.push(GroupShare {
            tau_up,
            f_edge: server.f_max_edge,
            tau_down,
            p_down: down.power(tau_down),
        });
    }
    let phi_lo = solo
        .iter()
        .zip(&quality)
        .map(|(s, &q)| (s.tau_up + cycles / s.f_edge + s.tau_down) / q)
        .fold(T::zero(), T::max);

    if users.len() == 1 {
        let outcomes = outcomes_of(&solo);
        return Ok(GroupSolution {
            users: users.to_vec(),
            shares: solo,
            outcomes,
            phi: phi_lo,
            phi_infeasible: phi_lo,
        });
    }

    let check = |phi: T| {
        let deadlines: Vec<T> = quality.iter().map(|&q| phi * q).collect();
        server_group_feasible(net, k, users, &deadlines, settings)
    };
    let two = T::lit(2.0);
    let mut lo = phi_lo;
    let mut hi = phi_lo * two;
    let mut best = check(hi);
    let mut doublings = 0;
    while !best.feasible() {
        lo = hi;
        hi = hi * two;
        doublings += 1;
        if doublings >= settings.max_iterations || !hi.is_finite() {
            return Err(best.verdict.unwrap_err());
        }
        best = check(hi);
    }
    for _ in 0..settings.max_iterations {
        if hi - lo <= settings.phi_tolerance * hi {
            break;
        }
        let mid = (lo + hi) / two;
        let c = check(mid);
        if c.feasible() {
            hi = mid;
            best = c;
        } else {
            lo = mid;
        }
    }
    let outcomes = outcomes_of(&best.shares);
    Ok(GroupSolution {
        users: users.to_vec(),
        shares: best.shares,
        outcomes,
        phi: hi,
        phi_infeasible: lo,
    })
}

/// Assembles an [`InnerSolution`] from solved pieces.
pub(crate) fn assemble<T: Scalar>(
    assignment: &Assignment,
    locals: &[Option<LocalSolution<T>>],
    groups: &[Option<&GroupSolution<T>>],
) -> InnerSolution<T> {
    let n_count = assignment.len();
    let mut resources = Vec::with_capacity(n_count);
    let mut outcomes = Vec::with_capacity(n_count);
    for (n, choice) in assignment.choices().iter().enumerate() {
        match *choice {
            Choice::Local => {
                let s = locals[n].expect("local piece solved");
                resources.push(PairResources::Local {
                    f_local: s.f_local,
                    tau_tr: s.tau_tr,
                });
                outcomes.push(s.outcome);
            }
            Choice::Offload(k) => {
                let g = groups[k].expect("group piece solved");
                let i = g
                    .users
                    .iter()
                    .position(|&u| u == n)
                    .expect("member of its group");
                let s = g.shares[i];
                resources.push(PairResources::Offload {
                    tau_up: s.tau_up,
                    f_edge: s.f_edge,
                    tau_down: s.tau_down,
                });
                outcomes.push(g.outcomes[i]);
            }
        }
    }
    let utility = outcomes.iter().map(|o| o.ccq).fold(T::zero(), T::max);
    InnerSolution {
        resources: ResourceAllocation(resources),
        outcomes,
        utility,
        status: SolveStatus::Optimal,
    }
}

/// Solves the continuous problem for a fixed, capacity-respecting assignment.
pub fn solve_inner<T: Scalar>(
    assignment: &Assignment,
    net: &NetworkRealization<T>,
    settings: &SolverSettings<T>,
) -> InnerSolution<T> {
    let mut locals = vec![None; assignment.len()];
    for (n, choice) in assignment.choices().iter().enumerate() {
        if *choice == Choice::Local {
            match solve_local_pair(
                &net.transmitters[n],
                net.gains.direct[n],
                &net.radio,
                settings,
            ) {
                Ok(s) => locals[n] = Some(s),
                Err(budget) => return InnerSolution::infeasible(Culprit::Local(n), budget),
            }
        }
    }
    let mut solved = Vec::with_capacity(net.num_servers());
    for k in 0..net.num_servers() {
        let members = assignment.members(k);
        if members.is_empty() {
            solved.push(None);
            continue;
        }
        match solve_server_group(net, k, &members, settings) {
            Ok(g) => solved.push(Some(g)),
            Err(budget) => return InnerSolution::infeasible(Culprit::Server(k), budget),
        }
    }
    let groups: Vec<Option<&GroupSolution<T>>> = solved.iter().map(Option::as_ref).collect();
    assemble(assignment, &locals, &groups)
}
