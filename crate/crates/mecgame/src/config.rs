//! Global system parameters and per-user profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical and economic parameters shared by every user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Slot duration in seconds.
    pub t0: f64,
    /// Job arrival rate at each device, jobs per second.
    pub lambda_a: f64,
    /// Mean CPU cycles per job.
    pub mu_a: f64,
    /// Offload data size per job, nats.
    pub la_mua: f64,
    /// Transmit power, watts.
    pub p_t: f64,
    /// Receiver noise power, watts.
    pub sigma2: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Edge server CPU speed, cycles per second.
    pub f_b: f64,
    /// Seconds of airtime per unit of `la_mua / beta`. The rate threshold is
    /// read as nats per slot, so the default is `t0`; set to 1.0 to read it
    /// as nats per second instead.
    pub rate_unit_scale: f64,
    /// Unit price charged per unit of offloading frequency.
    pub price: f64,
    /// Convergence threshold for the best-response iteration.
    pub epsilon: f64,
    /// Number of users in the system.
    pub n_users: usize,
}

impl SystemConfig {
    /// Edge service rate in jobs per second.
    pub fn mu_b(&self) -> f64 {
        self.f_b / self.mu_a
    }

    /// Per-slot arrival probability of the Bernoulli arrival process.
    pub fn arrival_prob(&self) -> f64 {
        self.lambda_a * self.t0
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("t0", self.t0),
            ("lambda_a", self.lambda_a),
            ("mu_a", self.mu_a),
            ("la_mua", self.la_mua),
            ("p_t", self.p_t),
            ("sigma2", self.sigma2),
            ("f_b", self.f_b),
            ("rate_unit_scale", self.rate_unit_scale),
            ("epsilon", self.epsilon),
        ];
        for (name, v) in positive {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.price < 0.0 || !self.price.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "price must be non-negative, got {}",
                self.price
            )));
        }
        if self.alpha <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Per-user parameters. The received SNR may be given directly via `rho`,
/// otherwise it is derived from the distance through the path-loss law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    /// Distance to the access point, meters.
    pub d: f64,
    /// Received SNR override; `None` derives it from `d`.
    pub rho: Option<f64>,
    /// Weight of computational time, 1/s.
    pub c_t: f64,
    /// Weight of computational energy, 1/J.
    pub c_e: f64,
    /// Local CPU speed, cycles per second.
    pub f_m: f64,
    /// Chip energy coefficient, J s^2 / cycles^3.
    pub kappa_m: f64,
}

impl UserProfile {
    /// Local service rate in jobs per second.
    pub fn mu_m(&self, cfg: &SystemConfig) -> f64 {
        self.f_m / cfg.mu_a
    }

    /// Energy spent computing one job locally, joules.
    pub fn local_energy(&self, cfg: &SystemConfig) -> f64 {
        self.kappa_m * self.f_m * self.f_m * cfg.mu_a
    }

    /// Effective received SNR: the override when present, otherwise the
    /// path-loss value `d^-alpha * p_t / sigma2`.
    pub fn snr(&self, cfg: &SystemConfig) -> Result<f64> {
        match self.rho {
            Some(r) if r > 0.0 => Ok(r),
            Some(r) => Err(Error::InvalidConfig(format!("rho must be positive, got {r}"))),
            None => crate::model::snr_from_distance(self.d, cfg),
        }
    }

    pub fn validate(&self, cfg: &SystemConfig) -> Result<()> {
        if self.c_t.is_nan() || self.c_t <= 0.0 || self.c_t >= 1.0 {
            return Err(Error::InvalidConfig(format!("c_t must lie in (0,1), got {}", self.c_t)));
        }
        if self.c_e.is_nan() || self.c_e <= 0.0 || self.c_e >= 1.0 {
            return Err(Error::InvalidConfig(format!("c_e must lie in (0,1), got {}", self.c_e)));
        }
        if self.f_m.is_nan() || self.f_m <= 0.0 {
            return Err(Error::InvalidConfig(format!("f_m must be positive, got {}", self.f_m)));
        }
        if self.kappa_m < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "kappa_m must be non-negative, got {}",
                self.kappa_m
            )));
        }
        // A device that cannot keep up with its own arrivals even when fully
        // retaining jobs has an unstable local queue at x = 0.
        if self.mu_m(cfg) <= cfg.lambda_a {
            return Err(Error::Infeasible(format!(
                "local queue unstable: mu_m = {} <= lambda_a = {}",
                self.mu_m(cfg),
                cfg.lambda_a
            )));
        }
        self.snr(cfg)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::section_v;

    #[test]
    fn section_v_derived_rates() {
        let (cfg, user) = section_v(100);
        assert_eq!(cfg.mu_b(), 30.0);
        assert_eq!(user.mu_m(&cfg), 1.0);
        assert!((user.local_energy(&cfg) - 0.01).abs() < 1e-15);
        assert_eq!(user.snr(&cfg).unwrap(), 0.89);
        cfg.validate().unwrap();
        user.validate(&cfg).unwrap();
    }

    #[test]
    fn unstable_local_queue_rejected() {
        let (cfg, mut user) = section_v(1);
        user.f_m = 0.5e8; // mu_m = 0.5 < lambda_a = 0.6
        assert!(matches!(user.validate(&cfg), Err(Error::Infeasible(_))));
    }

    #[test]
    fn bad_weights_rejected() {
        let (cfg, mut user) = section_v(1);
        user.c_t = 1.0;
        assert!(user.validate(&cfg).is_err());
    }
}
