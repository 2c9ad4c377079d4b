//! Cost, utility, demand and profit models.
//!
//! A user offloads an arriving job whenever the instantaneous channel gain
//! supports its rate threshold `beta`, which makes the offloading frequency
//! `x = ccdf((e^beta - 1) / rho)` the control variable. Retained jobs feed a
//! local M/M/1 queue with service rate `mu_m`; offloaded jobs feed the shared
//! edge M/M/1 queue with service rate `mu_b`. Costs weight sojourn times and
//! energies by `c_t` and `c_e`.
//!
//! The utility of a frequency `x` is the cost a user saves relative to
//! computing everything locally, excluding the shared edge-queue delay; the
//! demand function `g` is its derivative and is strictly decreasing. Profit
//! is utility minus the congestion cost of the shared queue, and can be
//! computed two independent ways (total-cost difference vs. the
//! utility/congestion split); both are provided.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelModel;
use crate::config::{SystemConfig, UserProfile};
use crate::error::{Error, Result};
use crate::numerics;

/// Threshold value encoding "never offload" (frequency zero).
pub const NEVER_OFFLOAD: f64 = f64::INFINITY;

/// Received SNR at the access point for a device at distance `d`:
/// `d^-alpha * p_t / sigma2`.
pub fn snr_from_distance(d: f64, cfg: &SystemConfig) -> Result<f64> {
    if d.is_nan() || d <= 0.0 {
        return Err(Error::Domain(format!("distance must be positive, got {d}")));
    }
    Ok(d.powf(-cfg.alpha) * cfg.p_t / cfg.sigma2)
}

/// Offloading frequency reached with rate threshold `beta` (nats per slot):
/// the probability that the channel gain exceeds `(e^beta - 1) / rho`.
pub fn frequency_from_threshold(beta: f64, rho: f64, ch: &dyn ChannelModel) -> Result<f64> {
    if beta < 0.0 || beta.is_nan() {
        return Err(Error::Domain(format!("threshold must be non-negative, got {beta}")));
    }
    if rho.is_nan() || rho <= 0.0 {
        return Err(Error::Domain(format!("rho must be positive, got {rho}")));
    }
    if beta == NEVER_OFFLOAD {
        return Ok(0.0);
    }
    Ok(ch.ccdf(beta.exp_m1() / rho))
}

/// Rate threshold that realizes offloading frequency `x`:
/// `beta = ln(1 + rho * inverse_ccdf(x))`.
///
/// `x = 0` maps to [`NEVER_OFFLOAD`]; `x = 1` maps to zero threshold.
pub fn threshold_from_frequency(x: f64, rho: f64, ch: &dyn ChannelModel) -> Result<f64> {
    if rho.is_nan() || rho <= 0.0 {
        return Err(Error::Domain(format!("rho must be positive, got {rho}")));
    }
    if !(0.0..=1.0).contains(&x) || x.is_nan() {
        return Err(Error::Domain(format!("frequency must lie in [0,1], got {x}")));
    }
    if x == 0.0 {
        return Ok(NEVER_OFFLOAD);
    }
    Ok((rho * ch.inverse_ccdf(x)).ln_1p())
}

/// Derivative of [`threshold_from_frequency`] with respect to `x`.
pub fn threshold_deriv(x: f64, rho: f64, ch: &dyn ChannelModel) -> Result<f64> {
    if x.is_nan() || x <= 0.0 || x >= 1.0 {
        return Err(Error::Domain(format!("frequency must lie in (0,1), got {x}")));
    }
    Ok(rho * ch.inverse_ccdf_deriv(x) / (1.0 + rho * ch.inverse_ccdf(x)))
}

/// A strategy profile: one offloading frequency per user, each in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffloadVector(Vec<f64>);

impl OffloadVector {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        for (k, &v) in x.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) || v.is_nan() {
                return Err(Error::Domain(format!("x[{k}] = {v} outside [0,1]")));
            }
        }
        Ok(Self(x))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn uniform(x: f64, n: usize) -> Result<Self> {
        Self::new(vec![x; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn mean(&self) -> f64 {
        if self.0.is_empty() {
            0.0
        } else {
            self.0.iter().sum::<f64>() / self.0.len() as f64
        }
    }

    /// Aggregate edge arrival rate `sum_k lambda_a x_k`.
    pub fn total_load(&self, cfg: &SystemConfig) -> f64 {
        cfg.lambda_a * self.0.iter().sum::<f64>()
    }

    /// Whether the shared edge queue is stable under this profile.
    pub fn is_stable(&self, cfg: &SystemConfig) -> bool {
        self.total_load(cfg) < cfg.mu_b()
    }

    pub fn is_all_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }
}

impl std::ops::Index<usize> for OffloadVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Local-computing cost components at frequency `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalCost {
    /// Mean sojourn in the local queue, seconds.
    pub d_lc: f64,
    /// Energy per locally computed job, joules.
    pub e_lc: f64,
    /// Weighted local cost `c_e * e_lc + c_t * d_lc`.
    pub z_lc: f64,
}

/// Local queue sojourn, energy and weighted cost when a fraction `1 - x` of
/// arrivals is retained: `d_lc = 1 / (mu_m - lambda_a (1 - x))`.
pub fn local_cost(x: f64, u: &UserProfile, cfg: &SystemConfig) -> Result<LocalCost> {
    if !(0.0..=1.0).contains(&x) || x.is_nan() {
        return Err(Error::Domain(format!("frequency must lie in [0,1], got {x}")));
    }
    let mu_m = u.mu_m(cfg);
    let retained = cfg.lambda_a * (1.0 - x);
    if mu_m - retained <= 0.0 {
        return Err(Error::Infeasible(format!(
            "local queue unstable: mu_m = {mu_m}, retained rate = {retained}"
        )));
    }
    let d_lc = 1.0 / (mu_m - retained);
    let e_lc = u.local_energy(cfg);
    Ok(LocalCost {
        d_lc,
        e_lc,
        z_lc: u.c_e * e_lc + u.c_t * d_lc,
    })
}

/// Edge-computing cost components at frequency `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCost {
    /// Airtime spent transmitting one job, seconds.
    pub d_ec1: f64,
    /// Transmit energy per offloaded job, joules.
    pub e_ec: f64,
    /// Mean sojourn at the edge queue, seconds.
    pub d_ec2: f64,
    /// Weighted edge cost `c_e * e_ec + c_t * (d_ec1 + d_ec2)`.
    pub z_ec: f64,
}

/// Edge airtime, transmit energy, queue sojourn and weighted cost for a user
/// offloading at frequency `x > 0` while the rest of the system contributes
/// `load_others` jobs per second to the edge queue.
pub fn edge_cost(
    x: f64,
    load_others: f64,
    u: &UserProfile,
    cfg: &SystemConfig,
    ch: &dyn ChannelModel,
) -> Result<EdgeCost> {
    if x.is_nan() || x <= 0.0 || x > 1.0 {
        return Err(Error::Domain(format!("frequency must lie in (0,1], got {x}")));
    }
    let mu_b = cfg.mu_b();
    let total = load_others + cfg.lambda_a * x;
    if mu_b - total <= 0.0 {
        return Err(Error::Infeasible(format!(
            "edge queue unstable: mu_b = {mu_b}, offered load = {total}"
        )));
    }
    let beta = threshold_from_frequency(x, u.snr(cfg)?, ch)?;
    let d_ec1 = cfg.rate_unit_scale * cfg.la_mua / beta;
    let e_ec = cfg.p_t * d_ec1;
    let d_ec2 = 1.0 / (mu_b - total);
    Ok(EdgeCost {
        d_ec1,
        e_ec,
        d_ec2,
        z_ec: u.c_e * e_ec + u.c_t * (d_ec1 + d_ec2),
    })
}

/// Cost saved by offloading at frequency `x`, excluding the shared-queue
/// delay: `U(x) = Z_lc(0) - (1-x) Z_lc(x) - x (c_e E_ec(x) + c_t D1_ec(x))`.
///
/// `U(0) = 0` exactly and `U` is strictly increasing up to the demand root.
pub fn utility(x: f64, u: &UserProfile, cfg: &SystemConfig, ch: &dyn ChannelModel) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) || x.is_nan() {
        return Err(Error::Domain(format!("frequency must lie in [0,1], got {x}")));
    }
    if x == 0.0 {
        local_cost(0.0, u, cfg)?; // still reject infeasible profiles
        return Ok(0.0);
    }
    let z0 = local_cost(0.0, u, cfg)?.z_lc;
    let lc = local_cost(x, u, cfg)?;
    let beta = threshold_from_frequency(x, u.snr(cfg)?, ch)?;
    let d_ec1 = cfg.rate_unit_scale * cfg.la_mua / beta;
    let e_ec = cfg.p_t * d_ec1;
    Ok(z0 - (1.0 - x) * lc.z_lc - x * (u.c_e * e_ec + u.c_t * d_ec1))
}

/// Marginal utility (demand) at `x` in the open interval (0, 1):
///
/// `g(x) = c_e E_lc + c_t mu_m / (mu_m - lambda_a (1-x))^2
///         - eta / beta(x) + eta x beta'(x) / beta(x)^2`
///
/// with `eta = (c_t + c_e p_t) * la_mua * rate_unit_scale`. Strictly
/// decreasing, with a finite positive limit at 0+ and -inf at 1-.
pub fn demand(x: f64, u: &UserProfile, cfg: &SystemConfig, ch: &dyn ChannelModel) -> Result<f64> {
    if x.is_nan() || x <= 0.0 || x >= 1.0 {
        return Err(Error::Domain(format!("frequency must lie in (0,1), got {x}")));
    }
    let mu_m = u.mu_m(cfg);
    let eta = (u.c_t + u.c_e * cfg.p_t) * cfg.la_mua * cfg.rate_unit_scale;
    let rho = u.snr(cfg)?;
    let beta = threshold_from_frequency(x, rho, ch)?;
    let beta_p = threshold_deriv(x, rho, ch)?;
    let denom = mu_m - cfg.lambda_a * (1.0 - x);
    Ok(u.c_e * u.local_energy(cfg) + u.c_t * mu_m / (denom * denom) - eta / beta
        + eta * x * beta_p / (beta * beta))
}

/// Limit of the demand function as `x -> 0+`:
/// `c_e E_lc + c_t mu_m / (mu_m - lambda_a)^2`. Always positive.
pub fn demand_at_zero(u: &UserProfile, cfg: &SystemConfig) -> f64 {
    let mu_m = u.mu_m(cfg);
    let denom = mu_m - cfg.lambda_a;
    u.c_e * u.local_energy(cfg) + u.c_t * mu_m / (denom * denom)
}

/// Unique root `x_up` of the demand function in (0, 1), the frequency beyond
/// which further offloading reduces utility. Returns 0 when even the first
/// offloaded job is unprofitable (`g(0+) <= 0`, impossible for valid
/// profiles but kept as the documented fallback).
pub fn demand_root(u: &UserProfile, cfg: &SystemConfig, ch: &dyn ChannelModel) -> Result<f64> {
    let g0 = demand_at_zero(u, cfg);
    if g0 <= 0.0 {
        return Ok(0.0);
    }
    let f = |x: f64| {
        if x <= 0.0 {
            g0
        } else if x >= 1.0 {
            f64::NEG_INFINITY
        } else {
            demand(x, u, cfg, ch).unwrap_or(f64::NEG_INFINITY)
        }
    };
    let root = numerics::bisect(f, 0.0, 1.0, 1e-14, numerics::DEFAULT_MAX_ITER)?.x;
    let residual = f(root).abs();
    if residual >= 1e-9 {
        return Err(Error::Numerics(format!(
            "demand root residual {residual:.3e} exceeds 1e-9 at x = {root}"
        )));
    }
    Ok(root)
}

/// Profit of one user under a full strategy profile, with its decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfitParts {
    /// Gross profit: local-only cost minus expected total cost.
    pub profit: f64,
    /// Utility component (own-variable terms only).
    pub utility: f64,
    /// Congestion cost of the shared edge queue, `c_t x D2_ec`.
    pub congestion: f64,
}

impl ProfitParts {
    /// Difference between the two profit routes; zero up to rounding.
    pub fn decomposition_gap(&self) -> f64 {
        self.profit - (self.utility - self.congestion)
    }
}

/// Profit of user `k` under profile `xs`, computed as the total-cost saving,
/// together with the utility and congestion terms of the alternative
/// utility-minus-congestion route.
pub fn profit(
    k: usize,
    xs: &OffloadVector,
    users: &[UserProfile],
    cfg: &SystemConfig,
    ch: &dyn ChannelModel,
) -> Result<ProfitParts> {
    if xs.len() != users.len() {
        return Err(Error::InvalidConfig(format!(
            "profile count {} != strategy count {}",
            users.len(),
            xs.len()
        )));
    }
    if !xs.is_stable(cfg) {
        return Err(Error::Infeasible(format!(
            "edge queue unstable: load {} >= mu_b {}",
            xs.total_load(cfg),
            cfg.mu_b()
        )));
    }
    let u = &users[k];
    let x = xs[k];
    let z0 = local_cost(0.0, u, cfg)?.z_lc;
    let d_ec2 = 1.0 / (cfg.mu_b() - xs.total_load(cfg));

    let (z_total, util) = if x == 0.0 {
        (z0, 0.0)
    } else {
        let lc = local_cost(x, u, cfg)?;
        let load_others = xs.total_load(cfg) - cfg.lambda_a * x;
        let ec = edge_cost(x, load_others, u, cfg, ch)?;
        let z_total = (1.0 - x) * lc.z_lc + x * ec.z_ec;
        let util = z0 - (1.0 - x) * lc.z_lc - x * (u.c_e * ec.e_ec + u.c_t * ec.d_ec1);
        (z_total, util)
    };

    Ok(ProfitParts {
        profit: z0 - z_total,
        utility: util,
        congestion: u.c_t * x * d_ec2,
    })
}

/// Full per-user cost record under a strategy profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub d_lc: f64,
    pub e_lc: f64,
    pub z_lc: f64,
    pub d_ec1: f64,
    pub e_ec: f64,
    pub d_ec2: f64,
    pub z_ec: f64,
    /// Expected total cost `(1-x) z_lc + x z_ec`.
    pub z_total: f64,
    pub utility: f64,
    pub congestion: f64,
    pub profit: f64,
}

/// Assemble the complete cost record for user `k`. Edge-side quantities for
/// a zero-frequency user are zero by convention.
pub fn cost_breakdown(
    k: usize,
    xs: &OffloadVector,
    users: &[UserProfile],
    cfg: &SystemConfig,
    ch: &dyn ChannelModel,
) -> Result<CostBreakdown> {
    let parts = profit(k, xs, users, cfg, ch)?;
    let u = &users[k];
    let x = xs[k];
    let lc = local_cost(x, u, cfg)?;
    let (d_ec1, e_ec, d_ec2, z_ec) = if x == 0.0 {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        let load_others = xs.total_load(cfg) - cfg.lambda_a * x;
        let ec = edge_cost(x, load_others, u, cfg, ch)?;
        (ec.d_ec1, ec.e_ec, ec.d_ec2, ec.z_ec)
    };
    Ok(CostBreakdown {
        d_lc: lc.d_lc,
        e_lc: lc.e_lc,
        z_lc: lc.z_lc,
        d_ec1,
        e_ec,
        d_ec2,
        z_ec,
        z_total: (1.0 - x) * lc.z_lc + x * z_ec,
        utility: parts.utility,
        congestion: parts.congestion,
        profit: parts.profit,
    })
}
