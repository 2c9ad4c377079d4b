//! Shared scenario builders for the integration suites.
#![allow(dead_code)]

use mecgame::{SystemConfig, UserProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Canonical evaluation scenario: 1 ms slots, 0.6 jobs/s arrivals, 100-Mcycle
/// jobs carrying 100 nats, 3 GHz edge, 0.1 GHz devices at 50 m with the SNR
/// pinned to 0.89.
pub fn section_v(n_users: usize) -> (SystemConfig, UserProfile) {
    let cfg = SystemConfig {
        t0: 1e-3,
        lambda_a: 0.6,
        mu_a: 1e8,
        la_mua: 100.0,
        p_t: 0.1,
        sigma2: 1e-7,
        alpha: 3.5,
        f_b: 3e9,
        rate_unit_scale: 1e-3,
        price: 0.0,
        epsilon: 1e-3,
        n_users,
    };
    let user = UserProfile {
        d: 50.0,
        rho: Some(0.89),
        c_t: 0.9,
        c_e: 0.1,
        f_m: 1e8,
        kappa_m: 1e-26,
    };
    (cfg, user)
}

/// Random feasible profile against the canonical system parameters:
/// distances in [5, 100] m (SNR derived), weights in (0, 1), local service
/// rate comfortably above the arrival rate.
pub fn random_profile(rng: &mut ChaCha12Rng, cfg: &SystemConfig) -> UserProfile {
    let mu_m = cfg.lambda_a + 0.2 + rng.random::<f64>() * 2.0;
    UserProfile {
        d: 5.0 + rng.random::<f64>() * 95.0,
        rho: None,
        c_t: 0.05 + rng.random::<f64>() * 0.9,
        c_e: 0.05 + rng.random::<f64>() * 0.9,
        f_m: mu_m * cfg.mu_a,
        kappa_m: 1e-27 * 10f64.powf(rng.random::<f64>() * 2.0),
    }
}

/// Users placed uniformly at random on a ring of radii [r_min, r_max],
/// sharing the canonical cost weights and CPU speeds.
pub fn ring_users(n: usize, r_min: f64, r_max: f64, seed: u64) -> Vec<UserProfile> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let (_, base) = section_v(n);
    (0..n)
        .map(|_| {
            let d = r_min + rng.random::<f64>() * (r_max - r_min);
            UserProfile {
                d,
                rho: None,
                ..base.clone()
            }
        })
        .collect()
}

pub fn seeded_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}
