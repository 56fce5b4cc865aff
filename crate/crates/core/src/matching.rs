//! Outer level: search over transmitter-to-server matchings.
//!
//! A matching maps each transmitter to a server or to "unmatched" (local
//! generation). Its utility is the optimal max-CCQ of the inner problem,
//! `+inf` when that problem is infeasible. The swap/leave/join local search
//! applies any strictly improving operation until none exists, i.e. until
//! the matching is two-sided stable.

use std::cell::RefCell;
use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inner::{
    assemble, solve_local_pair, solve_server_group, Budget, Culprit, GroupSolution, InnerSolution,
    LocalSolution, SolverSettings,
};
use crate::model::{Assignment, Choice, NetworkRealization};
use crate::scalar::Scalar;

/// Memoizing front end to the inner solver.
///
/// Local pairs and server groups are independent subproblems, so their
/// solutions are cached by `(server, members)` and reused across the many
/// matchings visited during a search. Results are identical to
/// [`crate::inner::solve_inner`].
pub struct Evaluator<'a, T: Scalar> {
    net: &'a NetworkRealization<T>,
    settings: SolverSettings<T>,
    locals: RefCell<Vec<Option<Result<LocalSolution<T>, Budget>>>>,
    groups: RefCell<HashMap<(usize, Vec<usize>), Result<GroupSolution<T>, Budget>>>,
}

impl<'a, T: Scalar> Evaluator<'a, T> {
    pub fn new(net: &'a NetworkRealization<T>, settings: SolverSettings<T>) -> Self {
        Self {
            net,
            settings,
            locals: RefCell::new(vec![None; net.num_transmitters()]),
            groups: RefCell::new(HashMap::new()),
        }
    }

    pub fn network(&self) -> &NetworkRealization<T> {
        self.net
    }

    pub fn settings(&self) -> &SolverSettings<T> {
        &self.settings
    }

    fn local(&self, n: usize) -> Result<LocalSolution<T>, Budget> {
        if let Some(r) = self.locals.borrow()[n] {
            return r;
        }
        let tx = &self.net.transmitters[n];
        let r = solve_local_pair(
            tx,
            self.net.gains.direct[n],
            &self.net.radio,
            &self.settings,
        );
        self.locals.borrow_mut()[n] = Some(r);
        r
    }

    fn ensure_group(&self, k: usize, members: &[usize]) -> Result<(), Budget> {
        let key = (k, members.to_vec());
        if let Some(r) = self.groups.borrow().get(&key) {
            return r.as_ref().map(|_| ()).map_err(|b| *b);
        }
        let r = solve_server_group(self.net, k, members, &self.settings);
        let out = r.as_ref().map(|_| ()).map_err(|b| *b);
        self.groups.borrow_mut().insert(key, r);
        out
    }

    /// Inner solution of `assignment`.
    pub fn solve(&self, assignment: &Assignment) -> InnerSolution<T> {
        let mut locals = vec![None; assignment.len()];
        for (n, c) in assignment.choices().iter().enumerate() {
            if *c == Choice::Local {
                match self.local(n) {
                    Ok(s) => locals[n] = Some(s),
                    Err(b) => return InnerSolution::infeasible(Culprit::Local(n), b),
                }
            }
        }
        let members: Vec<Vec<usize>> = (0..self.net.num_servers())
            .map(|k| assignment.members(k))
            .collect();
        for (k, m) in members.iter().enumerate() {
            if !m.is_empty() {
                if let Err(b) = self.ensure_group(k, m) {
                    return InnerSolution::infeasible(Culprit::Server(k), b);
                }
            }
        }
        let cache = self.groups.borrow();
        let groups: Vec<Option<&GroupSolution<T>>> = members
            .iter()
            .enumerate()
            .map(|(k, m)| {
                if m.is_empty() {
                    None
                } else {
                    cache.get(&(k, m.clone())).and_then(|r| r.as_ref().ok())
                }
            })
            .collect();
        assemble(assignment, &locals, &groups)
    }

    /// Max-CCQ of `assignment`; `+inf` when infeasible.
    pub fn utility(&self, assignment: &Assignment) -> T {
        self.solve(assignment).utility
    }
}

/// An assignment together with its cached inner solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matching<T> {
    pub assignment: Assignment,
    pub solution: InnerSolution<T>,
}

impl<T: Scalar> Matching<T> {
    pub fn new(assignment: Assignment, eval: &Evaluator<'_, T>) -> Self {
        let solution = eval.solve(&assignment);
        Self {
            assignment,
            solution,
        }
    }

    pub fn utility(&self) -> T {
        self.solution.utility
    }

    /// Server of transmitter `n`, `None` when unmatched.
    pub fn partner(&self, n: usize) -> Option<usize> {
        self.assignment.0[n].server()
    }

    /// Transmitters matched with server `k`.
    pub fn matched_with(&self, k: usize) -> Vec<usize> {
        self.assignment.members(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Operation {
    Swap(usize, usize),
    Leave(usize, usize),
    Join(usize, usize),
}

/// An accepted, strictly improving operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockingOperation<T> {
    pub kind: Operation,
    pub utility_before: T,
    pub utility_after: T,
}

/// Candidate matching produced by `op`, or `None` when `op` does not apply.
pub fn apply<T: Scalar>(
    assignment: &Assignment,
    op: Operation,
    net: &NetworkRealization<T>,
) -> Option<Assignment> {
    let mut next = assignment.clone();
    match op {
        Operation::Swap(a, b) => {
            let (ka, kb) = (assignment.0[a].server()?, assignment.0[b].server()?);
            if a == b || ka == kb {
                return None;
            }
            next.0[a] = Choice::Offload(kb);
            next.0[b] = Choice::Offload(ka);
        }
        Operation::Leave(n, k) => {
            if assignment.0[n] != Choice::Offload(k) {
                return None;
            }
            next.0[n] = Choice::Local;
        }
        Operation::Join(n, k) => {
            if assignment.0[n] != Choice::Local || assignment.load(k) >= net.servers[k].capacity {
                return None;
            }
            next.0[n] = Choice::Offload(k);
        }
    }
    Some(next)
}

fn try_operation<T: Scalar>(
    m: &mut Matching<T>,
    op: Operation,
    eval: &Evaluator<'_, T>,
) -> Option<BlockingOperation<T>> {
    let candidate = apply(&m.assignment, op, eval.network())?;
    let solution = eval.solve(&candidate);
    let before = m.utility();
    if solution.utility < before {
        let accepted = BlockingOperation {
            kind: op,
            utility_before: before,
            utility_after: solution.utility,
        };
        m.assignment = candidate;
        m.solution = solution;
        Some(accepted)
    } else {
        None
    }
}

/// Exchanges the servers of two matched transmitters if that strictly
/// lowers the utility. Same-server or unmatched pairs are skipped.
pub fn try_swap<T: Scalar>(
    m: &mut Matching<T>,
    n: usize,
    other: usize,
    eval: &Evaluator<'_, T>,
) -> Option<BlockingOperation<T>> {
    try_operation(m, Operation::Swap(n, other), eval)
}

/// Moves a matched transmitter to local generation if strictly better.
pub fn try_leave<T: Scalar>(
    m: &mut Matching<T>,
    n: usize,
    eval: &Evaluator<'_, T>,
) -> Option<BlockingOperation<T>> {
    let k = m.partner(n)?;
    try_operation(m, Operation::Leave(n, k), eval)
}

/// Matches an unmatched transmitter with a not-full server if strictly better.
pub fn try_join<T: Scalar>(
    m: &mut Matching<T>,
    n: usize,
    k: usize,
    eval: &Evaluator<'_, T>,
) -> Option<BlockingOperation<T>> {
    try_operation(m, Operation::Join(n, k), eval)
}

/// Every candidate operation in sweep order: swaps over `(n, n')` with
/// `n < n'`, then leaves by `n`, then joins by `(n, k)`.
fn candidates(n_count: usize, k_count: usize) -> impl Iterator<Item = Operation> {
    let swaps =
        (0..n_count).flat_map(move |a| (a + 1..n_count).map(move |b| Operation::Swap(a, b)));
    let leaves = (0..n_count).map(|n| Operation::Leave(n, usize::MAX));
    let joins = (0..n_count).flat_map(move |n| (0..k_count).map(move |k| Operation::Join(n, k)));
    swaps.chain(leaves).chain(joins)
}

fn resolve(op: Operation, assignment: &Assignment) -> Option<Operation> {
    match op {
        Operation::Leave(n, _) => assignment.0[n].server().map(|k| Operation::Leave(n, k)),
        other => Some(other),
    }
}

/// Scans all swap/leave/join candidates of `m`; returns the first that
/// strictly lowers the utility, without modifying `m`.
pub fn find_blocking<T: Scalar>(
    m: &Matching<T>,
    eval: &Evaluator<'_, T>,
) -> Option<BlockingOperation<T>> {
    let net = eval.network();
    candidates(net.num_transmitters(), net.num_servers()).find_map(|op| {
        let op = resolve(op, &m.assignment)?;
        let candidate = apply(&m.assignment, op, net)?;
        let after = eval.utility(&candidate);
        (after < m.utility()).then_some(BlockingOperation {
            kind: op,
            utility_before: m.utility(),
            utility_after: after,
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SljSettings<T> {
    pub solver: SolverSettings<T>,
    /// Independent random starts; the best stable matching is kept.
    pub restarts: usize,
    /// Accepted-operation cap; `None` means `10 * N * (N + K)`.
    pub operation_cap: Option<usize>,
}

impl<T: Scalar> Default for SljSettings<T> {
    fn default() -> Self {
        Self {
            solver: SolverSettings::default(),
            restarts: 1,
            operation_cap: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SljOutcome<T> {
    pub matching: Matching<T>,
    pub initial: Assignment,
    pub trace: Vec<BlockingOperation<T>>,
    pub sweeps: usize,
    /// True when the operation cap stopped the search early.
    pub capped: bool,
}

/// Random capacity-respecting matching: each transmitter in turn picks
/// uniformly among local generation and the servers with spare capacity.
pub fn random_matching<T: Scalar, R: Rng + ?Sized>(
    net: &NetworkRealization<T>,
    rng: &mut R,
) -> Assignment {
    let mut load = vec![0usize; net.num_servers()];
    let choices = (0..net.num_transmitters())
        .map(|_| {
            let mut options = vec![Choice::Local];
            options.extend(
                net.servers
                    .iter()
                    .enumerate()
                    .filter(|(k, s)| load[*k] < s.capacity)
                    .map(|(k, _)| Choice::Offload(k)),
            );
            let pick = options[rng.gen_range(0..options.len())];
            if let Choice::Offload(k) = pick {
                load[k] += 1;
            }
            pick
        })
        .collect();
    Assignment(choices)
}

/// Runs swap/leave/join sweeps from `initial` until a full sweep accepts
/// nothing (or the operation cap is hit).
pub fn slj_from<T: Scalar>(
    initial: Assignment,
    eval: &Evaluator<'_, T>,
    operation_cap: usize,
) -> SljOutcome<T> {
    let net = eval.network();
    let mut m = Matching::new(initial.clone(), eval);
    let mut trace = Vec::new();
    let mut sweeps = 0;
    let mut capped = false;
    'outer: loop {
        sweeps += 1;
        let mut accepted_any = false;
        for op in candidates(net.num_transmitters(), net.num_servers()) {
            let Some(op) = resolve(op, &m.assignment) else {
                continue;
            };
            if let Some(b) = try_operation(&mut m, op, eval) {
                trace.push(b);
                accepted_any = true;
                if trace.len() >= operation_cap {
                    capped = true;
                    break 'outer;
                }
            }
        }
        if !accepted_any {
            break;
        }
    }
    SljOutcome {
        matching: m,
        initial,
        trace,
        sweeps,
        capped,
    }
}

pub fn default_operation_cap(n: usize, k: usize) -> usize {
    (10 * n * (n + k)).max(1)
}

/// Swap/leave/join matching from `settings.restarts` random starts; the
/// lowest-utility result wins (earliest on ties).
pub fn slj_match<T: Scalar, R: Rng + ?Sized>(
    net: &NetworkRealization<T>,
    settings: &SljSettings<T>,
    rng: &mut R,
) -> SljOutcome<T> {
    let eval = Evaluator::new(net, settings.solver);
    slj_match_with(&eval, settings, rng)
}

/// [`slj_match`] reusing an existing evaluator cache.
pub fn slj_match_with<T: Scalar, R: Rng + ?Sized>(
    eval: &Evaluator<'_, T>,
    settings: &SljSettings<T>,
    rng: &mut R,
) -> SljOutcome<T> {
    let net = eval.network();
    let cap = settings
        .operation_cap
        .unwrap_or_else(|| default_operation_cap(net.num_transmitters(), net.num_servers()));
    let mut best: Option<SljOutcome<T>> = None;
    for _ in 0..settings.restarts.max(1) {
        let start = random_matching(net, rng);
        let out = slj_from(start, eval, cap);
        if best
            .as_ref()
            .map_or(true, |b| out.matching.utility() < b.matching.utility())
        {
            best = Some(out);
        }
    }
    best.expect("at least one restart")
}

/// Number of raw assignments `(K + 1)^N`, saturating.
pub fn assignment_space(n: usize, k: usize) -> u128 {
    (k as u128 + 1).checked_pow(n as u32).unwrap_or(u128::MAX)
}

/// All capacity-respecting assignments in lexicographic order
/// (`Local < Offload(0) < Offload(1) < ...` per transmitter, first
/// transmitter most significant).
pub fn feasible_assignments<T: Scalar>(net: &NetworkRealization<T>) -> Vec<Assignment> {
    let (n, k) = (net.num_transmitters(), net.num_servers());
    let mut out = Vec::new();
    let mut digits = vec![0usize; n];
    loop {
        let a = Assignment(
            digits
                .iter()
                .map(|&d| {
                    if d == 0 {
                        Choice::Local
                    } else {
                        Choice::Offload(d - 1)
                    }
                })
                .collect(),
        );
        if a.respects_capacity(&net.servers) {
            out.push(a);
        }
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] <= k {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// Exhaustive optimum over every capacity-respecting matching. Refuses
/// instances with more than `cap` raw assignments.
pub fn enumerate_optimal<T: Scalar>(eval: &Evaluator<'_, T>, cap: u64) -> Result<Matching<T>> {
    let net = eval.network();
    let space = assignment_space(net.num_transmitters(), net.num_servers());
    if space > u128::from(cap) {
        return Err(Error::EnumerationCap {
            assignments: space,
            cap,
        });
    }
    let mut best: Option<Matching<T>> = None;
    for a in feasible_assignments(net) {
        let m = Matching::new(a, eval);
        if best.as_ref().map_or(true, |b| m.utility() < b.utility()) {
            best = Some(m);
        }
    }
    Ok(best.expect("all-local assignment is always capacity-feasible"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelGains;
    use crate::inner::solve_inner;
    use crate::model::{EdgeModel, ModelProfile, Radio, ServerProfile, TransmitterProfile};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tx(flops: f64, q: f64, f_max: f64) -> TransmitterProfile<f64> {
        TransmitterProfile {
            source_bits: 2e4,
            prompt_bits: 400.0,
            device_model: ModelProfile {
                flops,
                intensity: 0.01,
                quality: q,
            },
            p_max: 0.1,
            f_max_local: f_max,
            kappa_eff: 1e-27,
            e_max: 0.9,
        }
    }

    fn server(flops: f64, q: f64, n: usize, cap: usize) -> ServerProfile<f64> {
        ServerProfile {
            edge_model: EdgeModel {
                flops,
                intensity: 0.01,
                quality: vec![q; n],
            },
            p_hat_max: 1.0,
            f_max_edge: 12e9,
            capacity: cap,
        }
    }

    fn net(
        txs: Vec<TransmitterProfile<f64>>,
        servers: Vec<ServerProfile<f64>>,
        up: Vec<Vec<f64>>,
    ) -> NetworkRealization<f64> {
        let n = txs.len();
        let k = servers.len();
        NetworkRealization {
            transmitters: txs,
            servers,
            gains: ChannelGains {
                direct: vec![1e-6; n],
                up,
                down: vec![vec![1e-5; n]; k],
            },
            radio: Radio {
                bandwidth: 2e6,
                noise: 7.962e-15,
                exponent_cap: 60.0,
            },
        }
    }

    #[test]
    fn evaluator_matches_direct_solve() {
        let n = net(
            vec![
                tx(16e9, 62.0, 3e9),
                tx(9.2e9, 57.1, 5e9),
                tx(16e9, 62.0, 4e9),
            ],
            vec![server(35.1e9, 69.3, 3, 2), server(161.8e9, 76.6, 3, 2)],
            vec![vec![2e-5, 1e-5]; 3],
        );
        let eval = Evaluator::new(&n, SolverSettings::default());
        for a in feasible_assignments(&n) {
            let direct = solve_inner(&a, &n, &SolverSettings::default());
            assert_eq!(eval.solve(&a), direct);
            // second pass hits the cache
            assert_eq!(eval.solve(&a), direct);
        }
    }

    #[test]
    fn no_servers_means_all_local() {
        let n = net(
            vec![tx(9.2e9, 57.1, 3e9), tx(16e9, 62.0, 3e9)],
            vec![],
            vec![vec![]; 2],
        );
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = slj_match(&n, &SljSettings::default(), &mut rng);
        assert_eq!(out.matching.assignment, Assignment::all_local(2));
        assert!(out.trace.is_empty());
    }

    #[test]
    fn same_server_swap_is_skipped() {
        let n = net(
            vec![tx(16e9, 62.0, 3e9), tx(16e9, 62.0, 3e9)],
            vec![server(35.1e9, 69.3, 2, 2)],
            vec![vec![2e-5]; 2],
        );
        let a = Assignment(vec![Choice::Offload(0), Choice::Offload(0)]);
        assert!(apply(&a, Operation::Swap(0, 1), &n).is_none());
        let eval = Evaluator::new(&n, SolverSettings::default());
        let mut m = Matching::new(a.clone(), &eval);
        assert!(try_swap(&mut m, 0, 1, &eval).is_none());
        assert_eq!(m.assignment, a);
    }

    #[test]
    fn swap_between_identical_users_is_rejected() {
        let n = net(
            vec![tx(16e9, 62.0, 3e9), tx(16e9, 62.0, 3e9)],
            vec![server(35.1e9, 69.3, 2, 1), server(35.1e9, 69.3, 2, 1)],
            vec![vec![2e-5, 2e-5]; 2],
        );
        let eval = Evaluator::new(&n, SolverSettings::default());
        let mut m = Matching::new(
            Assignment(vec![Choice::Offload(0), Choice::Offload(1)]),
            &eval,
        );
        assert!(try_swap(&mut m, 0, 1, &eval).is_none());
    }

    #[test]
    fn crossed_assignment_is_swap_blocked() {
        // user 0 is close to server 1 only, user 1 close to server 0 only
        let weak = 1e-14;
        let n = net(
            vec![tx(16e9, 62.0, 3e9), tx(16e9, 62.0, 3e9)],
            vec![server(35.1e9, 69.3, 2, 1), server(35.1e9, 69.3, 2, 1)],
            vec![vec![weak, 2e-5], vec![2e-5, weak]],
        );
        let eval = Evaluator::new(&n, SolverSettings::default());
        let crossed = Assignment(vec![Choice::Offload(0), Choice::Offload(1)]);
        let mut m = Matching::new(crossed, &eval);
        let before = m.utility();
        let op = try_swap(&mut m, 0, 1, &eval).expect("swap accepted");
        assert!(op.utility_after < before);
        assert_eq!(
            m.assignment,
            Assignment(vec![Choice::Offload(1), Choice::Offload(0)])
        );
        assert_eq!(m.utility(), eval.utility(&m.assignment));
    }

    #[test]
    fn leave_accepted_when_local_is_better() {
        // equal quality, fast device, slow edge model
        let mut s = server(161.8e9, 57.1, 1, 1);
        s.f_max_edge = 11e9;
        let n = net(vec![tx(9.2e9, 57.1, 3e9)], vec![s], vec![vec![2e-5]]);
        let eval = Evaluator::new(&n, SolverSettings::default());
        let mut m = Matching::new(Assignment(vec![Choice::Offload(0)]), &eval);
        assert!(try_leave(&mut m, 0, &eval).is_some());
        assert_eq!(m.assignment, Assignment::all_local(1));
        // leaving again is not applicable
        assert!(try_leave(&mut m, 0, &eval).is_none());
    }

    #[test]
    fn join_accepted_for_better_edge_quality() {
        let n = net(
            vec![tx(9.2e9, 57.1, 3e9)],
            vec![server(35.1e9, 76.6, 1, 1)],
            vec![vec![2e-5]],
        );
        let eval = Evaluator::new(&n, SolverSettings::default());
        let mut m = Matching::new(Assignment::all_local(1), &eval);
        let op = try_join(&mut m, 0, 0, &eval).expect("join accepted");
        assert!(op.utility_after < op.utility_before);
        // then leaving would raise utility: rejected
        let before = m.clone();
        assert!(try_leave(&mut m, 0, &eval).is_none());
        assert_eq!(m, before);
    }

    #[test]
    fn join_on_full_server_not_attempted() {
        let n = net(
            vec![tx(9.2e9, 57.1, 3e9), tx(9.2e9, 57.1, 3e9)],
            vec![server(35.1e9, 76.6, 2, 1)],
            vec![vec![2e-5]; 2],
        );
        let a = Assignment(vec![Choice::Offload(0), Choice::Local]);
        assert!(apply(&a, Operation::Join(1, 0), &n).is_none());
    }

    #[test]
    fn infeasible_matching_is_left() {
        // server unreachable energetically: offloading is infeasible
        let n = net(
            vec![tx(9.2e9, 57.1, 3e9)],
            vec![server(35.1e9, 76.6, 1, 1)],
            vec![vec![1e-30]],
        );
        let eval = Evaluator::new(&n, SolverSettings::default());
        let mut m = Matching::new(Assignment(vec![Choice::Offload(0)]), &eval);
        assert!(m.utility().is_infinite());
        assert!(try_leave(&mut m, 0, &eval).is_some());
        assert!(m.utility().is_finite());
    }

    #[test]
    fn enumeration_single_transmitter_picks_best_option() {
        let n = net(
            vec![tx(16e9, 62.0, 3e9)],
            vec![server(161.8e9, 76.6, 1, 1), server(35.1e9, 69.3, 1, 1)],
            vec![vec![2e-5, 2e-5]],
        );
        let eval = Evaluator::new(&n, SolverSettings::default());
        let best = enumerate_optimal(&eval, 4096).unwrap();
        let options = [Choice::Local, Choice::Offload(0), Choice::Offload(1)];
        let min = options
            .iter()
            .map(|c| eval.utility(&Assignment(vec![*c])))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(best.utility(), min);
        assert_eq!(best.assignment, Assignment(vec![Choice::Offload(1)]));
    }

    #[test]
    fn enumeration_cap_refuses() {
        let n = net(
            vec![tx(16e9, 62.0, 3e9); 7],
            vec![server(35.1e9, 69.3, 7, 3); 3],
            vec![vec![2e-5; 3]; 7],
        );
        let eval = Evaluator::new(&n, SolverSettings::default());
        assert!(matches!(
            enumerate_optimal(&eval, 4096),
            Err(Error::EnumerationCap { .. })
        ));
    }

    #[test]
    fn feasible_assignment_listing() {
        let n = net(
            vec![tx(16e9, 62.0, 3e9); 2],
            vec![server(35.1e9, 69.3, 2, 1); 2],
            vec![vec![2e-5; 2]; 2],
        );
        let all = feasible_assignments(&n);
        // 9 raw, minus the two that double-book a capacity-1 server
        assert_eq!(all.len(), 7);
        assert_eq!(all[0], Assignment::all_local(2));
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn random_matching_respects_capacity() {
        let n = net(
            vec![tx(16e9, 62.0, 3e9); 6],
            vec![server(35.1e9, 69.3, 6, 1); 2],
            vec![vec![2e-5; 2]; 6],
        );
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            assert!(random_matching(&n, &mut rng).respects_capacity(&n.servers));
        }
    }
}
