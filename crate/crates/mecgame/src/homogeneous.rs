//! Closed-form equilibria for the homogeneous-user case.
//!
//! When all users share one demand function, both the selfish and the social
//! game admit an equal-frequency equilibrium characterized by a scalar root:
//!
//! * Nash:   `N lam x + sqrt(c_t (mu_b - (N-1) lam x) / g(x)) = mu_b`
//! * Social: `N lam x + sqrt(c_t mu_b / g(x)) = mu_b`
//!
//! Both left-hand sides are strictly increasing on (0, x_up), diverge at the
//! demand root, and start below `mu_b` exactly when
//! `g(0+) > c_t / mu_b` — otherwise the all-zero profile is the (trivial)
//! equilibrium. The aligning price for the regulated selfish game is
//! `P = (N-1) lam x_se g(x_se) / mu_b`.

use crate::channel::ChannelModel;
use crate::config::{SystemConfig, UserProfile};
use crate::error::{Error, Result};
use crate::model::{self, OffloadVector};
use crate::numerics;
use crate::result::{EquilibriumKind, EquilibriumResult};

/// A population of identical users.
#[derive(Debug, Clone)]
pub struct HomogeneousScenario {
    pub n_users: usize,
    pub profile: UserProfile,
    pub cfg: SystemConfig,
}

impl HomogeneousScenario {
    pub fn new(n_users: usize, profile: UserProfile, cfg: SystemConfig) -> Result<Self> {
        if n_users == 0 {
            return Err(Error::InvalidConfig("n_users must be at least 1".into()));
        }
        cfg.validate()?;
        profile.validate(&cfg)?;
        Ok(Self { n_users, profile, cfg })
    }

    pub fn users(&self) -> Vec<UserProfile> {
        vec![self.profile.clone(); self.n_users]
    }
}

/// Existence test for a positive equilibrium (the same inequality gates the
/// Nash and the Social case): `g(0+) > c_t / mu_b`, strictly.
pub fn ne_exists(s: &HomogeneousScenario) -> bool {
    model::demand_at_zero(&s.profile, &s.cfg) > s.profile.c_t / s.cfg.mu_b()
}

#[derive(Clone, Copy)]
enum Family {
    Nash,
    Social,
}

/// Scalar equilibrium equation, extended with `+inf` past any point where
/// the demand turns non-positive or a capacity term degenerates, so that
/// bisection on [0, 1] sees a single sign change.
fn phi(
    x: f64,
    family: Family,
    s: &HomogeneousScenario,
    ch: &dyn ChannelModel,
    g0: f64,
) -> f64 {
    let cfg = &s.cfg;
    let n = s.n_users as f64;
    let mu_b = cfg.mu_b();
    let c_t = s.profile.c_t;
    let g = if x <= 0.0 {
        g0
    } else if x >= 1.0 {
        return f64::INFINITY;
    } else {
        model::demand(x, &s.profile, cfg, ch).unwrap_or(f64::NEG_INFINITY)
    };
    if g <= 0.0 {
        return f64::INFINITY;
    }
    let arg = match family {
        Family::Nash => c_t * (mu_b - (n - 1.0) * cfg.lambda_a * x) / g,
        Family::Social => c_t * mu_b / g,
    };
    if arg < 0.0 {
        return f64::INFINITY;
    }
    n * cfg.lambda_a * x + arg.sqrt() - mu_b
}

/// First-order-condition residual of a uniform profile, in the form
/// `|g(x) - c_t (mu_b - (N-1) lam x) / (mu_b - N lam x)^2|` (Nash) or
/// `|g(x) - c_t mu_b / (mu_b - N lam x)^2|` (Social). Corner profiles
/// contribute only the violated part of their optimality condition.
fn uniform_residual(x: f64, family: Family, s: &HomogeneousScenario, ch: &dyn ChannelModel) -> f64 {
    let cfg = &s.cfg;
    let n = s.n_users as f64;
    let mu_b = cfg.mu_b();
    let c_t = s.profile.c_t;
    let denom = mu_b - n * cfg.lambda_a * x;
    let rhs = match family {
        Family::Nash => c_t * (mu_b - (n - 1.0) * cfg.lambda_a * x) / (denom * denom),
        Family::Social => c_t * mu_b / (denom * denom),
    };
    if x == 0.0 {
        (model::demand_at_zero(&s.profile, cfg) - rhs).max(0.0)
    } else {
        (model::demand(x, &s.profile, cfg, ch).unwrap_or(f64::NEG_INFINITY) - rhs).abs()
    }
}

fn solve_family(
    family: Family,
    kind: EquilibriumKind,
    s: &HomogeneousScenario,
    ch: &dyn ChannelModel,
) -> Result<EquilibriumResult> {
    let g0 = model::demand_at_zero(&s.profile, &s.cfg);
    if !ne_exists(s) {
        return Ok(EquilibriumResult {
            x: OffloadVector::zeros(s.n_users),
            kind,
            price: 0.0,
            residual: uniform_residual(0.0, family, s, ch),
            iterations: 0,
            trivial: true,
            converged: true,
            trace: Vec::new(),
        });
    }
    // phi(0) = sqrt(c_t mu_b / g0) - mu_b < 0 under the existence condition;
    // phi -> +inf before x reaches min(x_up, mu_b / (N lam), 1).
    let root = numerics::bisect(
        |x| phi(x, family, s, ch, g0),
        0.0,
        1.0,
        1e-13,
        numerics::DEFAULT_MAX_ITER,
    )?;
    let x = root.x;
    let residual = uniform_residual(x, family, s, ch);
    if residual >= 1e-8 {
        return Err(Error::Numerics(format!(
            "equilibrium residual {residual:.3e} exceeds 1e-8 at x = {x}"
        )));
    }
    Ok(EquilibriumResult {
        x: OffloadVector::uniform(x, s.n_users)?,
        kind,
        price: 0.0,
        residual,
        iterations: root.iterations,
        trivial: false,
        converged: true,
        trace: Vec::new(),
    })
}

/// Equal-frequency Nash equilibrium of the selfish game.
pub fn solve_ne(s: &HomogeneousScenario, ch: &dyn ChannelModel) -> Result<EquilibriumResult> {
    solve_family(Family::Nash, EquilibriumKind::Nash, s, ch)
}

/// Equal-frequency Social equilibrium of the sum-profit game.
pub fn solve_se(s: &HomogeneousScenario, ch: &dyn ChannelModel) -> Result<EquilibriumResult> {
    solve_family(Family::Social, EquilibriumKind::Social, s, ch)
}

/// Price that makes the regulated selfish game's equilibrium coincide with
/// the social one: `P = (N-1) lam x_se g(x_se) / mu_b`. Zero for a single
/// user or when only the trivial equilibrium exists.
pub fn optimal_price(s: &HomogeneousScenario, ch: &dyn ChannelModel) -> Result<f64> {
    let se = solve_se(s, ch)?;
    price_for_social_target(s, &se, ch)
}

/// Same as [`optimal_price`] but reusing an already-solved social point.
pub fn price_for_social_target(
    s: &HomogeneousScenario,
    se: &EquilibriumResult,
    ch: &dyn ChannelModel,
) -> Result<f64> {
    if se.trivial || s.n_users == 1 {
        return Ok(0.0);
    }
    let x = se.x[0];
    let g = model::demand(x, &s.profile, &s.cfg, ch)?;
    Ok((s.n_users as f64 - 1.0) * s.cfg.lambda_a * x * g / s.cfg.mu_b())
}
