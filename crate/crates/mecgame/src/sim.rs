//! Slotted-arrival queueing simulator.
//!
//! Each user receives at most one job per slot (Bernoulli with probability
//! `lambda_a * t0`, realized by sampling geometric inter-arrival gaps). On
//! arrival the channel gain is drawn and the job is offloaded exactly when
//! the gain clears the user's rate threshold; otherwise it joins the local
//! queue. Arrivals snap to slot boundaries while service times are
//! continuous exponentials, so the analytic sojourn formulas apply in the
//! small-slot limit. Sojourns are measured per FIFO queue by Lindley
//! recursion; the transmission airtime is not part of the edge sojourn.
//!
//! Randomness comes from a counter-based generator (ChaCha12) with one
//! substream per user plus one for edge service draws, so per-user results
//! do not depend on user ordering and reports are bit-reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelModel;
use crate::config::{SystemConfig, UserProfile};
use crate::error::{Error, Result};
use crate::model;

/// One simulated device: its profile and the rate threshold it applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimUser {
    pub profile: UserProfile,
    /// Rate threshold in nats per slot; `INFINITY` means never offload.
    pub beta: f64,
}

/// Simulation setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon_slots: u64,
    pub warmup_slots: u64,
    pub seed: u64,
    pub users: Vec<SimUser>,
    pub cfg: SystemConfig,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        if self.users.is_empty() {
            return Err(Error::InvalidConfig("no users to simulate".into()));
        }
        if self.horizon_slots <= self.warmup_slots {
            return Err(Error::InvalidConfig(format!(
                "horizon ({}) must exceed warmup ({})",
                self.horizon_slots, self.warmup_slots
            )));
        }
        for (k, su) in self.users.iter().enumerate() {
            su.profile.validate(&self.cfg)?;
            if su.beta < 0.0 || su.beta.is_nan() {
                return Err(Error::InvalidConfig(format!(
                    "user {k}: beta must be non-negative, got {}",
                    su.beta
                )));
            }
        }
        Ok(())
    }

    /// Analytic offloading frequency of each user at its threshold.
    pub fn analytic_frequencies(&self, ch: &dyn ChannelModel) -> Result<Vec<f64>> {
        self.users
            .iter()
            .map(|su| model::frequency_from_threshold(su.beta, su.profile.snr(&self.cfg)?, ch))
            .collect()
    }

    /// Reject configurations whose queues would be unstable.
    fn check_stability(&self, xs: &[f64]) -> Result<()> {
        for (k, (su, &x)) in self.users.iter().zip(xs).enumerate() {
            let retained = self.cfg.lambda_a * (1.0 - x);
            if retained >= su.profile.mu_m(&self.cfg) {
                return Err(Error::Infeasible(format!(
                    "user {k}: local queue unstable at x = {x}"
                )));
            }
        }
        let load: f64 = xs.iter().map(|&x| self.cfg.lambda_a * x).sum();
        if load >= self.cfg.mu_b() {
            return Err(Error::Infeasible(format!(
                "edge queue unstable: offered load {load} >= mu_b {}",
                self.cfg.mu_b()
            )));
        }
        Ok(())
    }
}

/// Aggregates for one FIFO queue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueStats {
    /// Jobs that arrived within the horizon.
    pub arrivals: u64,
    /// Jobs whose service finished by the horizon.
    pub departed: u64,
    /// Jobs still in the system at the horizon.
    pub in_system: u64,
    /// Post-warmup jobs contributing to the sojourn statistics.
    pub measured_jobs: u64,
    /// Mean sojourn (waiting plus service) in seconds; 0 when unmeasured.
    pub mean_sojourn: f64,
    /// 95% normal-approximation half width of the mean.
    pub ci95_half_width: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    count: u64,
    sum: f64,
    sum_sq: f64,
}

impl Accumulator {
    fn push(&mut self, v: f64) {
        self.count += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    fn stats(&self, arrivals: u64, departed: u64, in_system: u64) -> QueueStats {
        let (mean, ci) = if self.count == 0 {
            (0.0, 0.0)
        } else {
            let n = self.count as f64;
            let mean = self.sum / n;
            let var = (self.sum_sq / n - mean * mean).max(0.0);
            (mean, 1.96 * (var / n).sqrt())
        };
        QueueStats {
            arrivals,
            departed,
            in_system,
            measured_jobs: self.count,
            mean_sojourn: mean,
            ci95_half_width: ci,
        }
    }
}

/// Per-user simulation outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserReport {
    pub arrivals: u64,
    pub offloaded: u64,
    pub empirical_frequency: f64,
    pub analytic_frequency: f64,
    pub local: QueueStats,
}

/// Full simulation outcome. Identical seed and config give an identical
/// report, bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub users: Vec<UserReport>,
    pub edge: QueueStats,
    /// Expected post-superposition edge arrival count and its standard
    /// deviation under the analytic frequencies.
    pub edge_arrivals_expected: f64,
    pub edge_arrivals_std: f64,
}

/// Exponential draw by inverse transform; `u` uniform in [0, 1).
fn exp_draw(rng: &mut ChaCha12Rng, rate: f64) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}

/// Geometric gap on {1, 2, ...} with success probability `p` per slot.
fn geometric_gap(rng: &mut ChaCha12Rng, p: f64, cap: u64) -> u64 {
    let u: f64 = rng.random();
    let g = ((-u).ln_1p() / (-p).ln_1p()).ceil();
    if !g.is_finite() || g >= cap as f64 {
        cap
    } else {
        (g as u64).max(1)
    }
}

struct Lindley {
    last_finish: f64,
    horizon_secs: f64,
    warmup_slots: u64,
    arrivals: u64,
    departed: u64,
    in_system: u64,
    acc: Accumulator,
}

impl Lindley {
    fn new(horizon_secs: f64, warmup_slots: u64) -> Self {
        Self {
            last_finish: 0.0,
            horizon_secs,
            warmup_slots,
            arrivals: 0,
            departed: 0,
            in_system: 0,
            acc: Accumulator::default(),
        }
    }

    fn push(&mut self, slot: u64, arrival_time: f64, service: f64) {
        let start = arrival_time.max(self.last_finish);
        let finish = start + service;
        self.last_finish = finish;
        self.arrivals += 1;
        if finish <= self.horizon_secs {
            self.departed += 1;
        } else {
            self.in_system += 1;
        }
        if slot >= self.warmup_slots {
            self.acc.push(finish - arrival_time);
        }
    }

    fn stats(&self) -> QueueStats {
        self.acc.stats(self.arrivals, self.departed, self.in_system)
    }
}

/// Run the simulation and report per-user frequencies and sojourn statistics.
pub fn run_sim(sc: &SimConfig, ch: &dyn ChannelModel) -> Result<SimReport> {
    sc.validate()?;
    let xs = sc.analytic_frequencies(ch)?;
    sc.check_stability(&xs)?;

    let cfg = &sc.cfg;
    let p_a = cfg.arrival_prob();
    if p_a >= 1.0 {
        return Err(Error::InvalidConfig(format!(
            "arrival probability per slot must be below 1, got {p_a}"
        )));
    }
    let horizon_secs = sc.horizon_slots as f64 * cfg.t0;

    let mut users = Vec::with_capacity(sc.users.len());
    let mut edge_jobs: Vec<(u64, u32)> = Vec::new();

    for (k, su) in sc.users.iter().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(sc.seed);
        rng.set_stream(k as u64 + 1);

        let rho = su.profile.snr(cfg)?;
        let gain_threshold = if su.beta == model::NEVER_OFFLOAD {
            f64::INFINITY
        } else {
            su.beta.exp_m1() / rho
        };
        let mu_m = su.profile.mu_m(cfg);

        let mut local = Lindley::new(horizon_secs, sc.warmup_slots);
        let mut arrivals = 0u64;
        let mut offloaded = 0u64;

        let mut slot: u64 = 0;
        let mut first = true;
        loop {
            let gap = geometric_gap(&mut rng, p_a, sc.horizon_slots + 1);
            slot = if first { gap - 1 } else { slot + gap };
            first = false;
            if slot >= sc.horizon_slots {
                break;
            }
            arrivals += 1;
            let u: f64 = rng.random();
            let gain = ch.sample_gain(1.0 - u);
            // A zero threshold admits any channel, including a gain that
            // sampled to exactly zero.
            let offload = gain_threshold == 0.0 || gain > gain_threshold;
            if offload {
                offloaded += 1;
                edge_jobs.push((slot, k as u32));
            } else {
                let service = exp_draw(&mut rng, mu_m);
                local.push(slot, slot as f64 * cfg.t0, service);
            }
        }

        users.push(UserReport {
            arrivals,
            offloaded,
            empirical_frequency: if arrivals == 0 {
                0.0
            } else {
                offloaded as f64 / arrivals as f64
            },
            analytic_frequency: xs[k],
            local: local.stats(),
        });
    }

    // Shared edge queue: merge offloaded jobs in (slot, user) order and
    // serve them FIFO from the edge's own service stream.
    edge_jobs.sort_unstable();
    let mut edge_rng = ChaCha12Rng::seed_from_u64(sc.seed);
    edge_rng.set_stream(0);
    let mu_b = cfg.mu_b();
    let mut edge = Lindley::new(horizon_secs, sc.warmup_slots);
    for &(slot, _user) in &edge_jobs {
        let service = exp_draw(&mut edge_rng, mu_b);
        edge.push(slot, slot as f64 * cfg.t0, service);
    }

    let expected: f64 = xs.iter().map(|&x| sc.horizon_slots as f64 * p_a * x).sum();
    let var: f64 = xs
        .iter()
        .map(|&x| sc.horizon_slots as f64 * p_a * x * (1.0 - p_a * x))
        .sum();

    Ok(SimReport {
        users,
        edge: edge.stats(),
        edge_arrivals_expected: expected,
        edge_arrivals_std: var.sqrt(),
    })
}

/// Per-user comparison of empirical and analytic offloading frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyCheck {
    pub user: usize,
    pub empirical: f64,
    pub analytic: f64,
    pub gap: f64,
    /// Binomial standard error at the analytic frequency.
    pub std_err: f64,
}

impl FrequencyCheck {
    pub fn within(&self, sigmas: f64) -> bool {
        self.gap <= sigmas * self.std_err
    }
}

/// Simulate and compare each user's empirical offloading frequency against
/// the analytic channel-exceedance probability.
pub fn validate_frequency(sc: &SimConfig, ch: &dyn ChannelModel) -> Result<Vec<FrequencyCheck>> {
    let report = run_sim(sc, ch)?;
    Ok(report
        .users
        .iter()
        .enumerate()
        .map(|(k, u)| {
            let std_err = if u.arrivals == 0 {
                f64::INFINITY
            } else {
                (u.analytic_frequency * (1.0 - u.analytic_frequency) / u.arrivals as f64).sqrt()
            };
            FrequencyCheck {
                user: k,
                empirical: u.empirical_frequency,
                analytic: u.analytic_frequency,
                gap: (u.empirical_frequency - u.analytic_frequency).abs(),
                std_err,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Rayleigh;
    use crate::testutil::section_v;

    const CH: Rayleigh = Rayleigh;

    fn sim_config(n: usize, beta: f64, horizon: u64, seed: u64) -> SimConfig {
        let (cfg, profile) = section_v(n);
        SimConfig {
            horizon_slots: horizon,
            warmup_slots: horizon / 10,
            seed,
            users: vec![SimUser { profile, beta }; n],
            cfg,
        }
    }

    #[test]
    fn zero_threshold_offloads_everything() {
        let sc = sim_config(3, 0.0, 200_000, 7);
        let report = run_sim(&sc, &CH).unwrap();
        for u in &report.users {
            assert!(u.arrivals > 0);
            assert_eq!(u.empirical_frequency, 1.0);
            assert_eq!(u.local.arrivals, 0);
        }
    }

    #[test]
    fn huge_threshold_never_offloads() {
        let mut sc = sim_config(2, 30.0, 1_000_000, 3);
        // x is astronomically small; at this horizon no offload may occur.
        sc.users[1].beta = model::NEVER_OFFLOAD;
        let report = run_sim(&sc, &CH).unwrap();
        for u in &report.users {
            assert_eq!(u.offloaded, 0);
        }
        assert_eq!(report.edge.arrivals, 0);
        assert_eq!(report.edge.mean_sojourn, 0.0);
    }

    #[test]
    fn retained_stream_behaves_like_mm1() {
        // x = 0, lambda = 0.5, mu = 1: mean sojourn 1/(mu-lambda) = 2 s.
        let (mut cfg, mut profile) = section_v(1);
        cfg.lambda_a = 0.5;
        profile.f_m = 1e8; // mu_m = 1
        let sc = SimConfig {
            horizon_slots: 40_000_000,
            warmup_slots: 4_000_000,
            seed: 21,
            users: vec![SimUser {
                profile,
                beta: model::NEVER_OFFLOAD,
            }],
            cfg,
        };
        let report = run_sim(&sc, &CH).unwrap();
        let m = report.users[0].local.mean_sojourn;
        assert!((m - 2.0).abs() / 2.0 < 0.05, "mean sojourn {m}");
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let sc = sim_config(5, 1.0, 300_000, 99);
        let a = run_sim(&sc, &CH).unwrap();
        let b = run_sim(&sc, &CH).unwrap();
        assert_eq!(a, b);
        let c = run_sim(&sim_config(5, 1.0, 300_000, 100), &CH).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn conservation_per_queue() {
        let sc = sim_config(4, 0.8, 500_000, 13);
        let report = run_sim(&sc, &CH).unwrap();
        for u in &report.users {
            assert_eq!(u.local.arrivals, u.local.departed + u.local.in_system);
            assert_eq!(u.arrivals, u.offloaded + u.local.arrivals);
        }
        assert_eq!(report.edge.arrivals, report.edge.departed + report.edge.in_system);
        let offloaded_total: u64 = report.users.iter().map(|u| u.offloaded).sum();
        assert_eq!(report.edge.arrivals, offloaded_total);
    }

    #[test]
    fn superposition_count_within_three_sigma() {
        let sc = sim_config(20, 1.0, 2_000_000, 5);
        let report = run_sim(&sc, &CH).unwrap();
        let gap = (report.edge.arrivals as f64 - report.edge_arrivals_expected).abs();
        assert!(gap <= 3.0 * report.edge_arrivals_std, "gap {gap}");
    }

    #[test]
    fn frequency_validation_at_unit_threshold() {
        // rho = 0.89, beta = 1 gives x ~= 0.145.
        let sc = sim_config(10, 1.0, 2_000_000, 17);
        let checks = validate_frequency(&sc, &CH).unwrap();
        let ok = checks.iter().filter(|c| c.within(3.0)).count();
        assert!(ok >= 9, "only {ok}/10 users within 3 sigma");
        assert!((checks[0].analytic - 0.1450533403329896).abs() < 1e-12);
    }

    #[test]
    fn closer_user_offloads_more() {
        let (cfg, mut profile) = section_v(2);
        profile.rho = None;
        profile.d = 10.0;
        let near = SimUser {
            profile: profile.clone(),
            beta: 1.0,
        };
        profile.d = 70.0;
        let far = SimUser { profile, beta: 1.0 };
        let sc = SimConfig {
            horizon_slots: 3_000_000,
            warmup_slots: 300_000,
            seed: 23,
            users: vec![near, far],
            cfg,
        };
        let report = run_sim(&sc, &CH).unwrap();
        assert!(report.users[0].analytic_frequency > report.users[1].analytic_frequency);
        assert!(report.users[0].empirical_frequency > report.users[1].empirical_frequency);
    }

    #[test]
    fn unstable_configs_rejected_before_running() {
        // Local: a device that keeps everything but cannot keep up.
        let (cfg, mut profile) = section_v(1);
        profile.f_m = 0.7e8;
        let ok_user = SimUser {
            profile: profile.clone(),
            beta: model::NEVER_OFFLOAD,
        };
        let sc = SimConfig {
            horizon_slots: 1000,
            warmup_slots: 0,
            seed: 1,
            users: vec![ok_user],
            cfg: {
                let mut c = cfg.clone();
                c.lambda_a = 0.8; // mu_m = 0.7 < 0.8
                c
            },
        };
        assert!(matches!(run_sim(&sc, &CH), Err(Error::Infeasible(_))));

        // Edge: everyone offloads everything into a tiny server.
        let (mut cfg, profile) = section_v(100);
        cfg.f_b = 3e9; // mu_b = 30 < 100 * 0.6 at x = 1
        let sc = SimConfig {
            horizon_slots: 1000,
            warmup_slots: 0,
            seed: 1,
            users: vec![
                SimUser {
                    profile,
                    beta: 0.0
                };
                100
            ],
            cfg,
        };
        assert!(matches!(run_sim(&sc, &CH), Err(Error::Infeasible(_))));
    }

    #[test]
    fn horizon_must_exceed_warmup() {
        let mut sc = sim_config(1, 1.0, 1000, 1);
        sc.warmup_slots = 1000;
        assert!(sc.validate().is_err());
    }
}
