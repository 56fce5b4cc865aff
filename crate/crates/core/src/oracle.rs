//! Brute-force reference solutions for small instances.
//!
//! Everything here is written directly from the model equations, sharing no
//! code with the inner solver: the continuous variables are scanned on
//! log-spaced grids that are repeatedly zoomed around the best feasible
//! point. Results are upper bounds on the true optimum.

use crate::model::{Assignment, Choice, NetworkRealization};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Points per dimension per stage.
    pub points: usize,
    /// Zoom stages after the first full scan.
    pub stages: usize,
    /// Half-width of the zoomed window, in grid steps.
    pub window: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points: 300,
            stages: 4,
            window: 6.0,
        }
    }
}

fn log_grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (points - 1) as f64;
    (0..points).map(move |i| (a + step * i as f64).exp())
}

/// Step ratio of a log grid.
fn ratio(lo: f64, hi: f64, points: usize) -> f64 {
    ((hi / lo).ln() / (points - 1) as f64).exp()
}

/// Window of `window` steps either side of `x`, clipped to `[lo0, hi0]`.
fn zoom(x: f64, r: f64, window: f64, lo0: f64, hi0: f64) -> (f64, f64) {
    let w = r.powf(window);
    ((x / w).max(lo0), (x * w).min(hi0))
}

fn power(bits: f64, tau: f64, gain: f64, noise: f64, bw: f64) -> f64 {
    (2f64.powf(bits / (bw * tau)) - 1.0) * noise / gain
}

fn latency(bits: f64, p: f64, gain: f64, noise: f64, bw: f64) -> f64 {
    bits / (bw * (1.0 + p * gain / noise).log2())
}

const TAU_LO: f64 = 1e-7;
const TAU_HI: f64 = 1e3;

/// Minimizes `g(x, y)` over a 2-D log grid, `None` if no grid point is
/// feasible (`g` returns `None`).
fn grid_2d(
    spec: &GridSpec,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    g: impl Fn(f64, f64) -> Option<f64>,
) -> Option<(f64, f64, f64)> {
    let mut xr = (x0, x1);
    let mut yr = (y0, y1);
    let mut best: Option<(f64, f64, f64)> = None;
    for _ in 0..=spec.stages {
        for x in log_grid(xr.0, xr.1, spec.points) {
            for y in log_grid(yr.0, yr.1, spec.points) {
                if let Some(v) = g(x, y) {
                    if best.map_or(true, |b| v < b.2) {
                        best = Some((x, y, v));
                    }
                }
            }
        }
        let (bx, by, _) = best?;
        let (rx, ry) = (
            ratio(xr.0, xr.1, spec.points),
            ratio(yr.0, yr.1, spec.points),
        );
        xr = zoom(bx, rx, spec.window, x0, x1);
        yr = zoom(by, ry, spec.window, y0, y1);
    }
    best
}

/// Minimizes `g(x)` over a 1-D log grid.
fn grid_1d(
    spec: &GridSpec,
    (x0, x1): (f64, f64),
    g: impl Fn(f64) -> Option<f64>,
) -> Option<(f64, f64)> {
    let mut xr = (x0, x1);
    let mut best: Option<(f64, f64)> = None;
    let points = spec.points * 10;
    for _ in 0..=spec.stages {
        for x in log_grid(xr.0, xr.1, points) {
            if let Some(v) = g(x) {
                if best.map_or(true, |b| v < b.1) {
                    best = Some((x, v));
                }
            }
        }
        let (bx, _) = best?;
        xr = zoom(bx, ratio(xr.0, xr.1, points), spec.window, x0, x1);
    }
    best
}

/// Best latency of on-device pair `n`, scanning `(f_local, tau_tr)`.
pub fn local_pair(net: &NetworkRealization<f64>, n: usize, spec: &GridSpec) -> Option<f64> {
    let tx = &net.transmitters[n];
    let (noise, bw) = (net.radio.noise, net.radio.bandwidth);
    let cycles = tx.device_model.flops * tx.device_model.intensity;
    let g = net.gains.direct[n];
    grid_2d(
        spec,
        (tx.f_max_local * 1e-4, tx.f_max_local),
        (TAU_LO, TAU_HI),
        |f, tau| {
            let p = power(tx.prompt_bits, tau, g, noise, bw);
            let e = tx.kappa_eff * cycles * f * f + p * tau;
            (p <= tx.p_max && e <= tx.e_max).then(|| cycles / f + tau)
        },
    )
    .map(|b| b.2)
}

/// Shortest feasible uplink latency of pair `n` towards server `k`.
pub fn uplink(net: &NetworkRealization<f64>, n: usize, k: usize, spec: &GridSpec) -> Option<f64> {
    let tx = &net.transmitters[n];
    let g = net.gains.up[n][k];
    let (noise, bw) = (net.radio.noise, net.radio.bandwidth);
    grid_1d(spec, (TAU_LO, TAU_HI), |tau| {
        let p = power(tx.source_bits, tau, g, noise, bw);
        (p <= tx.p_max && p * tau <= tx.e_max).then_some(tau)
    })
    .map(|b| b.1)
}

/// Best max-CCQ of the (at most two) users offloading to server `k`,
/// scanning the frequency and downlink power shares of the first user.
/// The remaining budget goes to the second user.
pub fn server_group(
    net: &NetworkRealization<f64>,
    k: usize,
    users: &[usize],
    spec: &GridSpec,
) -> Option<f64> {
    let server = &net.servers[k];
    let cycles = server.edge_model.flops * server.edge_model.intensity;
    let (noise, bw) = (net.radio.noise, net.radio.bandwidth);
    let ups: Vec<f64> = users
        .iter()
        .map(|&n| uplink(net, n, k, spec))
        .collect::<Option<_>>()?;
    let ccq = |i: usize, s: f64, t: f64| {
        let n = users[i];
        let down = latency(
            net.transmitters[n].prompt_bits,
            t * server.p_hat_max,
            net.gains.down[k][n],
            noise,
            bw,
        );
        (ups[i] + cycles / (s * server.f_max_edge) + down) / server.edge_model.quality[n]
    };
    match users.len() {
        0 => Some(0.0),
        1 => Some(ccq(0, 1.0, 1.0)),
        2 => grid_2d(spec, (1e-6, 1.0 - 1e-6), (1e-9, 1.0 - 1e-9), |s, t| {
            Some(ccq(0, s, t).max(ccq(1, 1.0 - s, 1.0 - t)))
        })
        .map(|b| b.2),
        _ => None,
    }
}

/// Grid-search utility of `assignment`, `None` when some pair has no
/// feasible grid point or a server hosts more than two users.
pub fn inner_utility(
    assignment: &Assignment,
    net: &NetworkRealization<f64>,
    spec: &GridSpec,
) -> Option<f64> {
    let mut utility = 0f64;
    for (n, c) in assignment.choices().iter().enumerate() {
        if *c == Choice::Local {
            let q = net.transmitters[n].device_model.quality;
            utility = utility.max(local_pair(net, n, spec)? / q);
        }
    }
    for k in 0..net.num_servers() {
        let users = assignment.members(k);
        if !users.is_empty() {
            utility = utility.max(server_group(net, k, &users, spec)?);
        }
    }
    Some(utility)
}
