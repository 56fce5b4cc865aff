//! The proposed scheme and the three comparison schemes.
//!
//! * FOPG: every transmitter offloads to a pre-selected server (strongest
//!   uplink, greedy on capacity overflow).
//! * FODPG: every transmitter generates its prompt on-device.
//! * SUO: same search as the proposed scheme but minimizing max latency
//!   (quality ignored).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inner::{solve_inner, InnerSolution, SolverSettings};
use crate::matching::{slj_match, SljSettings};
use crate::model::{Assignment, Choice, NetworkRealization, PairOutcome};
use crate::scalar::Scalar;

/// Result of one scheme on one realization. Outcomes always carry the true
/// qualities, whatever objective the scheme optimized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome<T> {
    pub assignment: Assignment,
    pub solution: InnerSolution<T>,
    /// Value of the scheme's own objective (max CCQ, or max latency for SUO).
    pub objective: T,
    /// Accepted matching operations, zero for fixed-assignment schemes.
    pub operations: usize,
}

impl<T: Scalar> SolveOutcome<T> {
    pub fn feasible(&self) -> bool {
        self.solution.is_optimal()
    }

    pub fn outcomes(&self) -> &[PairOutcome<T>] {
        &self.solution.outcomes
    }

    pub fn max_ccq(&self) -> T {
        self.solution.utility
    }

    pub fn max_latency(&self) -> T {
        self.fold(|o| o.latency, T::max, T::zero())
    }

    pub fn min_cider(&self) -> T {
        self.fold(|o| o.quality, T::min, T::infinity())
    }

    pub fn max_cider(&self) -> T {
        self.fold(|o| o.quality, T::max, T::zero())
    }

    pub fn mean_cider(&self) -> T {
        let n = self.outcomes().len();
        if n == 0 {
            return T::nan();
        }
        self.fold(|o| o.quality, |a, b| a + b, T::zero()) / T::lit(n as f64)
    }

    pub fn offloaded_count(&self) -> usize {
        self.assignment.offloaded_count()
    }

    fn fold(&self, field: impl Fn(&PairOutcome<T>) -> T, op: impl Fn(T, T) -> T, init: T) -> T {
        if !self.feasible() {
            return T::nan();
        }
        self.outcomes().iter().map(field).fold(init, op)
    }
}

/// Proposed scheme: swap/leave/join matching on the max-CCQ utility.
pub fn run_proposed<T: Scalar, R: Rng + ?Sized>(
    net: &NetworkRealization<T>,
    settings: &SljSettings<T>,
    rng: &mut R,
) -> SolveOutcome<T> {
    let out = slj_match(net, settings, rng);
    SolveOutcome {
        objective: out.matching.utility(),
        operations: out.trace.len(),
        assignment: out.matching.assignment,
        solution: out.matching.solution,
    }
}

/// Server pre-selection for FOPG: `(n, k)` links are visited in descending
/// uplink gain and each transmitter takes the first server with room.
pub fn fopg_assignment<T: Scalar>(net: &NetworkRealization<T>) -> Result<Assignment> {
    let n_count = net.num_transmitters();
    let capacity = net.total_capacity();
    if capacity < n_count {
        return Err(Error::InsufficientCapacity {
            capacity,
            transmitters: n_count,
        });
    }
    let mut links: Vec<(usize, usize)> = (0..n_count)
        .flat_map(|n| (0..net.num_servers()).map(move |k| (n, k)))
        .collect();
    links.sort_by(|a, b| {
        net.gains.up[b.0][b.1]
            .partial_cmp(&net.gains.up[a.0][a.1])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(b))
    });
    let mut load = vec![0usize; net.num_servers()];
    let mut choice = vec![None; n_count];
    for (n, k) in links {
        if choice[n].is_none() && load[k] < net.servers[k].capacity {
            choice[n] = Some(k);
            load[k] += 1;
        }
    }
    Ok(Assignment(
        choice
            .into_iter()
            .map(|k| Choice::Offload(k.expect("capacity suffices")))
            .collect(),
    ))
}

/// Fully offloaded prompt generation.
pub fn run_fopg<T: Scalar>(
    net: &NetworkRealization<T>,
    settings: &SolverSettings<T>,
) -> Result<SolveOutcome<T>> {
    let assignment = fopg_assignment(net)?;
    let solution = solve_inner(&assignment, net, settings);
    Ok(SolveOutcome {
        objective: solution.utility,
        assignment,
        solution,
        operations: 0,
    })
}

/// Fully on-device prompt generation.
pub fn run_fodpg<T: Scalar>(
    net: &NetworkRealization<T>,
    settings: &SolverSettings<T>,
) -> SolveOutcome<T> {
    let assignment = Assignment::all_local(net.num_transmitters());
    let solution = solve_inner(&assignment, net, settings);
    SolveOutcome {
        objective: solution.utility,
        assignment,
        solution,
        operations: 0,
    }
}

/// Re-scores a solution found on the unit-quality network with the real
/// qualities.
fn rescore<T: Scalar>(
    net: &NetworkRealization<T>,
    assignment: &Assignment,
    latency_only: InnerSolution<T>,
) -> InnerSolution<T> {
    if !latency_only.is_optimal() {
        return latency_only;
    }
    let outcomes: Vec<PairOutcome<T>> = latency_only
        .outcomes
        .iter()
        .zip(assignment.choices())
        .enumerate()
        .map(|(n, (o, c))| PairOutcome::new(o.latency, o.energy, net.quality(n, *c)))
        .collect();
    let utility = outcomes.iter().map(|o| o.ccq).fold(T::zero(), T::max);
    InnerSolution {
        resources: latency_only.resources,
        outcomes,
        utility,
        status: latency_only.status,
    }
}

/// Semantic-unaware offloading: the proposed pipeline with every quality
/// divisor set to one.
pub fn run_suo<T: Scalar, R: Rng + ?Sized>(
    net: &NetworkRealization<T>,
    settings: &SljSettings<T>,
    rng: &mut R,
) -> SolveOutcome<T> {
    let unit = net.with_unit_quality();
    let out = slj_match(&unit, settings, rng);
    let objective = out.matching.utility();
    let assignment = out.matching.assignment;
    SolveOutcome {
        objective,
        operations: out.trace.len(),
        solution: rescore(net, &assignment, out.matching.solution),
        assignment,
    }
}
