//! Scenario generation: node placement inside a disc and the large-scale
//! fading statistics every other module consumes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Attempts per user before rejection sampling gives up.
const MAX_PLACEMENT_ATTEMPTS: usize = 100_000;

/// Distance floor (m) applied only to RAU-RAU interference links, so two
/// RAUs sampled on top of each other cannot produce a path gain above 1.
const RAU_RAU_DIST_FLOOR_M: f64 = 1.0;

/// All scenario scalars: node counts, powers, noise variances, geometry and
/// frame structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemConfig {
    /// UL-receiving RAUs.
    pub n_ul: usize,
    /// DL-transmitting RAUs.
    pub n_dl: usize,
    /// UL users.
    pub k_ul: usize,
    /// DL users.
    pub k_dl: usize,
    /// Antennas per RAU.
    pub m: usize,
    /// Cell radius (m).
    pub radius: f64,
    /// Minimum user-to-RAU distance (m).
    pub min_access_dist: f64,
    /// Path-loss exponents for UL links, DL links and interference links.
    pub alpha_ul: f64,
    pub alpha_dl: f64,
    pub alpha_i: f64,
    /// Transmit and pilot powers (W).
    pub p_ul: f64,
    pub p_dl: f64,
    pub p_up: f64,
    pub p_dp: f64,
    /// Noise variances (W).
    pub sigma2_ul: f64,
    pub sigma2_dl: f64,
    pub sigma2_up: f64,
    pub sigma2_dp: f64,
    /// Frame length and the two pilot phase lengths (symbols).
    pub t_frame: usize,
    pub tau1: usize,
    pub tau2: usize,
    /// Transmission bandwidth (Hz).
    pub bandwidth_w: f64,
}

impl SystemConfig {
    pub fn n_total(&self) -> usize {
        self.n_ul + self.n_dl
    }

    pub fn k_total(&self) -> usize {
        self.k_ul + self.k_dl
    }

    /// Data symbols per frame.
    pub fn t_data(&self) -> usize {
        self.t_frame.saturating_sub(self.tau1 + self.tau2)
    }

    /// Fraction of the frame spent on data.
    pub fn prelog(&self) -> f64 {
        self.t_data() as f64 / self.t_frame as f64
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if self.n_ul < 1 || self.n_dl < 1 || self.k_ul < 1 || self.k_dl < 1 {
            return err("all node counts must be >= 1".into());
        }
        if self.m < 1 {
            return err("antennas per RAU must be >= 1".into());
        }
        if self.tau1 < self.k_total() {
            return err(format!(
                "tau1 = {} must cover all {} user pilots",
                self.tau1,
                self.k_total()
            ));
        }
        if self.tau2 < self.k_dl {
            return err(format!(
                "tau2 = {} must cover all {} DL-user pilots",
                self.tau2, self.k_dl
            ));
        }
        if self.tau1 + self.tau2 >= self.t_frame {
            return err("pilot phases must leave room for data symbols".into());
        }
        for (name, v) in [
            ("radius", self.radius),
            ("p_ul", self.p_ul),
            ("p_dl", self.p_dl),
            ("p_up", self.p_up),
            ("p_dp", self.p_dp),
            ("sigma2_ul", self.sigma2_ul),
            ("sigma2_dl", self.sigma2_dl),
            ("sigma2_up", self.sigma2_up),
            ("sigma2_dp", self.sigma2_dp),
            ("bandwidth_w", self.bandwidth_w),
        ] {
            if !(v > 0.0) {
                return err(format!("{name} must be strictly positive"));
            }
        }
        if !(self.min_access_dist >= 0.0 && self.min_access_dist < self.radius) {
            return err("min_access_dist must lie in [0, radius)".into());
        }
        Ok(())
    }
}

/// Sampled node positions. The first `n_ul` RAUs operate in UL-receive mode,
/// the remainder in DL-transmit mode; users are split the same way.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub ul_raus: Vec<[f64; 2]>,
    pub dl_raus: Vec<[f64; 2]>,
    pub ul_users: Vec<[f64; 2]>,
    pub dl_users: Vec<[f64; 2]>,
}

impl Geometry {
    /// CSV export with columns `kind,index,x_m,y_m`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,index,x_m,y_m\n");
        let mut push = |kind: &str, pts: &[[f64; 2]]| {
            for (i, p) in pts.iter().enumerate() {
                out.push_str(&format!("{kind},{i},{},{}\n", p[0], p[1]));
            }
        };
        push("ul_rau", &self.ul_raus);
        push("dl_rau", &self.dl_raus);
        push("ul_user", &self.ul_users);
        push("dl_user", &self.dl_users);
        out
    }
}

/// Large-scale path gains for all four link classes.
///
/// Indexing is `[rau][user]` for access links, `[dl_user][ul_user]` for the
/// user-to-user interference class and `[ul_rau][dl_rau]` for the RAU-to-RAU
/// interference class.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStats<F: Real> {
    pub lambda_ul: Vec<Vec<F>>,
    pub lambda_dl: Vec<Vec<F>>,
    pub lambda_i_user: Vec<Vec<F>>,
    pub lambda_i_rau: Vec<Vec<F>>,
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn sample_in_disc(rng: &mut impl Rng, radius: f64) -> [f64; 2] {
    let r = radius * rng.gen::<f64>().sqrt();
    let phi = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
    [r * phi.cos(), r * phi.sin()]
}

/// Places RAUs and users uniformly in the disc. User positions are rejected
/// until every distance to every RAU is at least `min_access_dist`;
/// near-infeasible configurations fail after a bounded attempt count.
pub fn sample_geometry(cfg: &SystemConfig, seed: u64) -> Result<Geometry> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let raus: Vec<[f64; 2]> = (0..cfg.n_total())
        .map(|_| sample_in_disc(&mut rng, cfg.radius))
        .collect();

    let place_user = |rng: &mut ChaCha8Rng| -> Result<[f64; 2]> {
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let p = sample_in_disc(rng, cfg.radius);
            if raus.iter().all(|r| dist(p, *r) >= cfg.min_access_dist) {
                return Ok(p);
            }
        }
        Err(Error::Geometry(format!(
            "could not place a user at least {} m from every RAU within {} attempts",
            cfg.min_access_dist, MAX_PLACEMENT_ATTEMPTS
        )))
    };

    let mut users = Vec::with_capacity(cfg.k_total());
    for _ in 0..cfg.k_total() {
        users.push(place_user(&mut rng)?);
    }

    Ok(Geometry {
        ul_raus: raus[..cfg.n_ul].to_vec(),
        dl_raus: raus[cfg.n_ul..].to_vec(),
        ul_users: users[..cfg.k_ul].to_vec(),
        dl_users: users[cfg.k_ul..].to_vec(),
    })
}

/// Converts geometry into path gains `d^(-alpha)`, with the exponent chosen
/// per link class. Distances are in meters.
pub fn large_scale_fading<F: Real>(geom: &Geometry, cfg: &SystemConfig) -> ChannelStats<F> {
    let gain = |d: f64, alpha: f64| F::of(d.powf(-alpha));

    let lambda_ul = geom
        .ul_raus
        .iter()
        .map(|r| {
            geom.ul_users
                .iter()
                .map(|u| gain(dist(*r, *u), cfg.alpha_ul))
                .collect()
        })
        .collect();
    let lambda_dl = geom
        .dl_raus
        .iter()
        .map(|r| {
            geom.dl_users
                .iter()
                .map(|u| gain(dist(*r, *u), cfg.alpha_dl))
                .collect()
        })
        .collect();
    let lambda_i_user = geom
        .dl_users
        .iter()
        .map(|d| {
            geom.ul_users
                .iter()
                .map(|u| gain(dist(*d, *u), cfg.alpha_i))
                .collect()
        })
        .collect();
    let lambda_i_rau = geom
        .ul_raus
        .iter()
        .map(|i| {
            geom.dl_raus
                .iter()
                .map(|j| gain(dist(*i, *j).max(RAU_RAU_DIST_FLOOR_M), cfg.alpha_i))
                .collect()
        })
        .collect();

    ChannelStats {
        lambda_ul,
        lambda_dl,
        lambda_i_user,
        lambda_i_rau,
    }
}

/// The reference evaluation scenario: a 1 km circular area with three RAUs
/// per direction, ten antennas each, and a 196-symbol frame.
impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            n_ul: 3,
            n_dl: 3,
            k_ul: 2,
            k_dl: 3,
            m: 10,
            radius: 1000.0,
            min_access_dist: 30.0,
            alpha_ul: 3.7,
            alpha_dl: 3.7,
            alpha_i: 3.0,
            p_ul: 0.5,
            p_dl: 0.5,
            p_up: 0.5,
            p_dp: 1.0,
            sigma2_ul: 1.0,
            sigma2_dl: 1.0,
            sigma2_up: 1.0,
            sigma2_dp: 1.0,
            t_frame: 196,
            tau1: 5,
            tau2: 3,
            bandwidth_w: 2.0e7,
        }
    }
}

#[cfg(test)]
pub(crate) fn test_config() -> SystemConfig {
    SystemConfig::default()
}
