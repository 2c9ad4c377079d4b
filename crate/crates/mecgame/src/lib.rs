//! Equilibria of a multi-user mobile-edge offloading game.
//!
//! Devices receive jobs as a Poisson stream and choose, job by job, whether
//! to compute locally or offload through a fading uplink to a shared edge
//! server; the offloading frequency is steered by a rate threshold. This
//! crate provides:
//!
//! * the cost/utility/demand/profit model ([`model`]),
//! * closed-form Nash and Social equilibria plus the aligning price for
//!   identical users ([`homogeneous`]),
//! * the decentralized best-response iteration for regulated and social
//!   games ([`engine`]),
//! * interchangeable solver strategies selectable by name ([`registry`]),
//! * a slotted-arrival queueing simulator validating the analytic delay
//!   formulas ([`sim`]).

pub mod channel;
pub mod config;
pub mod engine;
pub mod error;
pub mod homogeneous;
pub mod model;
pub mod numerics;
pub mod registry;
pub mod result;
pub mod sim;

pub use channel::{ChannelModel, Rayleigh};
pub use config::{SystemConfig, UserProfile};
pub use error::{Error, Result};
pub use model::{CostBreakdown, OffloadVector, ProfitParts};
pub use result::{EquilibriumKind, EquilibriumResult, TraceRow};

#[cfg(test)]
pub(crate) mod testutil {
    use crate::config::{SystemConfig, UserProfile};

    /// Canonical evaluation scenario: 1 ms slots, 0.6 jobs/s, 100-Mcycle
    /// jobs carrying 100 nats, a 3 GHz edge serving 0.1 GHz devices at
    /// 50 m with SNR pinned to 0.89.
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
}
