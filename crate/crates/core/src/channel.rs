//! Random node placement and block-fading channel gains.
//!
//! Nodes are dropped uniformly over three discs (servers, transmitters,
//! receivers). Every link gain is `path_loss(d) * g` where `g` is a unit-mean
//! exponential draw, i.e. the power gain of a Rayleigh-faded amplitude.

use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Disc, ScenarioConfig};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry<T> {
    pub server_positions: Vec<Point<T>>,
    pub tx_positions: Vec<Point<T>>,
    pub rx_positions: Vec<Point<T>>,
}

/// Power gains for one fading block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelGains<T> {
    /// `direct[n]`: transmitter n to its paired receiver.
    pub direct: Vec<T>,
    /// `up[n][k]`: transmitter n to server k.
    pub up: Vec<Vec<T>>,
    /// `down[k][n]`: server k to receiver n.
    pub down: Vec<Vec<T>>,
}

impl<T: Scalar> ChannelGains<T> {
    pub fn all_positive(&self) -> bool {
        let ok = |g: &T| g.is_finite() && *g > T::zero();
        self.direct.iter().all(ok)
            && self.up.iter().flatten().all(ok)
            && self.down.iter().flatten().all(ok)
    }
}

/// Area-uniform point in a disc (`r = R * sqrt(u)`).
pub fn sample_in_disc<T: Scalar, R: Rng + ?Sized>(disc: &Disc, rng: &mut R) -> Point<T> {
    let u: f64 = rng.gen();
    let v: f64 = rng.gen();
    let r = disc.radius * u.sqrt();
    let theta = std::f64::consts::TAU * v;
    Point::new(
        T::lit(disc.center[0] + r * theta.cos()),
        T::lit(disc.center[1] + r * theta.sin()),
    )
}

pub fn sample_geometry<T: Scalar, R: Rng + ?Sized>(
    config: &ScenarioConfig,
    rng: &mut R,
) -> Geometry<T> {
    let g = &config.geometry;
    let server_positions = (0..config.servers)
        .map(|_| sample_in_disc(&g.servers, rng))
        .collect();
    let tx_positions = (0..config.transmitters)
        .map(|_| sample_in_disc(&g.transmitters, rng))
        .collect();
    let rx_positions = (0..config.transmitters)
        .map(|_| sample_in_disc(&g.receivers, rng))
        .collect();
    Geometry {
        server_positions,
        tx_positions,
        rx_positions,
    }
}

/// `1 / (1 + d/d0)^kappa`.
pub fn path_loss<T: Scalar>(d: T, d0: T, kappa: T) -> T {
    (T::one() + d / d0).powf(kappa).recip()
}

/// Unit-mean exponential draw, strictly positive.
pub fn rayleigh_power_gain<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    let u: f64 = rng.sample(Open01);
    T::lit(-u.ln())
}

pub fn sample_gains<T: Scalar, R: Rng + ?Sized>(
    geom: &Geometry<T>,
    config: &ScenarioConfig,
    rng: &mut R,
) -> ChannelGains<T> {
    let d0 = T::lit(config.radio.path_loss_reference_m);
    let kappa = T::lit(config.radio.path_loss_exponent);
    let link = |a: &Point<T>, b: &Point<T>, rng: &mut R| {
        path_loss(a.distance(b), d0, kappa) * rayleigh_power_gain::<T, R>(rng)
    };
    let direct = geom
        .tx_positions
        .iter()
        .zip(&geom.rx_positions)
        .map(|(t, r)| link(t, r, rng))
        .collect();
    let up = geom
        .tx_positions
        .iter()
        .map(|t| {
            geom.server_positions
                .iter()
                .map(|s| link(t, s, rng))
                .collect()
        })
        .collect();
    let down = geom
        .server_positions
        .iter()
        .map(|s| geom.rx_positions.iter().map(|r| link(s, r, rng)).collect())
        .collect();
    ChannelGains { direct, up, down }
}

/// Noise power in watts for a PSD in dBm/Hz over `bandwidth_hz`.
pub fn noise_power<T: Scalar>(psd_dbm_per_hz: T, bandwidth_hz: T) -> T {
    dbm_to_watts(psd_dbm_per_hz) * bandwidth_hz
}

pub fn dbm_to_watts<T: Scalar>(dbm: T) -> T {
    T::lit(10.0).powf((dbm - T::lit(30.0)) / T::lit(10.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn path_loss_hand_values() {
        assert_eq!(path_loss(0.0, 10.0, 2.7), 1.0);
        assert!(rel(path_loss(10.0, 10.0, 2.7), 2f64.powf(-2.7)) < 1e-12);
        assert!(rel(path_loss(10.0, 10.0, 2.7), 0.153_893_051_668_114_5) < 1e-10);
        assert!(rel(path_loss(990.0, 10.0, 2.7), 10f64.powf(-5.4)) < 1e-10);
    }

    #[test]
    fn noise_power_hand_values() {
        assert!(rel(noise_power(-30.0, 1.0), 1e-6) < 1e-12);
        assert!(rel(noise_power(-174.0, 1.0), 3.981_071_705_534_986e-21) < 1e-10);
        assert!(rel(noise_power(-174.0, 2e6), 7.962_143_411_069_972e-15) < 1e-10);
    }

    #[test]
    fn degenerate_disc_collapses_to_center() {
        let mut config = ScenarioConfig::default();
        config.geometry.servers.radius = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g: Geometry<f64> = sample_geometry(&config, &mut rng);
        assert_eq!(g.server_positions.len(), config.servers);
        for p in &g.server_positions {
            assert_eq!((p.x, p.y), (250.0, 250.0));
        }
    }

    #[test]
    fn points_stay_inside_discs() {
        let config = ScenarioConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let g: Geometry<f64> = sample_geometry(&config, &mut rng);
            let inside = |pts: &[Point<f64>], d: &Disc| {
                let c = Point::new(d.center[0], d.center[1]);
                pts.iter().all(|p| p.distance(&c) <= d.radius + 1e-9)
            };
            assert!(inside(&g.server_positions, &config.geometry.servers));
            assert!(inside(&g.tx_positions, &config.geometry.transmitters));
            assert!(inside(&g.rx_positions, &config.geometry.receivers));
        }
    }

    #[test]
    fn same_seed_same_draws() {
        let config = ScenarioConfig::default();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g: Geometry<f64> = sample_geometry(&config, &mut rng);
            let h = sample_gains(&g, &config, &mut rng);
            (g, h)
        };
        assert_eq!(draw(5), draw(5));
        assert_ne!(draw(5), draw(6));
    }

    #[test]
    fn fading_is_unit_mean_and_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 200_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let g: f64 = rayleigh_power_gain(&mut rng);
            assert!(g > 0.0 && g.is_finite());
            sum += g;
        }
        let mean = sum / n as f64;
        assert!((0.98..=1.02).contains(&mean), "mean {mean}");
    }

    #[test]
    fn uplink_gain_mean_tracks_path_loss() {
        let mut config = ScenarioConfig::default();
        config.transmitters = 1;
        config.servers = 1;
        let geom = Geometry {
            server_positions: vec![Point::new(250.0, 250.0)],
            tx_positions: vec![Point::new(0.0, 0.0)],
            rx_positions: vec![Point::new(0.0, 400.0)],
        };
        let expected = path_loss(
            geom.tx_positions[0].distance(&geom.server_positions[0]),
            10.0,
            2.7,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let h = sample_gains(&geom, &config, &mut rng);
            assert!(h.all_positive());
            sum += h.up[0][0];
        }
        assert!(rel(sum / n as f64, expected) < 0.02);
    }

    #[test]
    fn f32_path_loss_agrees() {
        let a: f32 = path_loss(10.0f32, 10.0, 2.7);
        assert!((a as f64 - 2f64.powf(-2.7)).abs() < 1e-6);
    }
}
