//! Decentralized best-response iteration.
//!
//! Each user repeatedly plays its best response to the residual edge
//! capacity `b = mu_b - sum_{j != k} lam x_j` left by the others, sweeping
//! users in index order with the freshest neighbor values. Two response
//! rules are supported:
//!
//! * regulated selfish: the interior response solves `F_N(x) = b` with
//!   `F_N(x) = lam x + c_t/(2 ghat(x)) + sqrt((c_t/(2 ghat(x)))^2 + c_t lam x / ghat(x))`,
//!   where `ghat = g - P` is the demand net of the price;
//! * social: the interior response solves `F_S(x) = b` with
//!   `F_S(x) = lam x + sqrt(c_t mu_b / g(x))`.
//!
//! Both maps are strictly increasing up to the (net) demand root and diverge
//! there, so the response is the corner 0 exactly when `b` does not exceed
//! the map's limit at 0+. The sweep stops when the mean absolute per-user
//! change drops to the configured threshold.

use crate::channel::ChannelModel;
use crate::config::{SystemConfig, UserProfile};
use crate::error::{Error, Result};
use crate::model::{self, OffloadVector};
use crate::numerics;
use crate::result::{EquilibriumKind, EquilibriumResult, TraceRow};

/// Default cap on best-response sweeps.
pub const DEFAULT_MAX_SWEEPS: usize = 10_000;

/// Which game the iteration plays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GameKind {
    /// Selfish responses against a per-unit offloading price.
    RegulatedSelfish { price: f64 },
    /// Responses satisfying the sum-profit optimality condition.
    SocialIteration,
}

impl GameKind {
    pub fn price(&self) -> f64 {
        match self {
            GameKind::RegulatedSelfish { price } => *price,
            GameKind::SocialIteration => 0.0,
        }
    }

    pub fn equilibrium_kind(&self) -> EquilibriumKind {
        match self {
            GameKind::RegulatedSelfish { price } if *price == 0.0 => EquilibriumKind::Nash,
            GameKind::RegulatedSelfish { .. } => EquilibriumKind::RegulatedNash,
            GameKind::SocialIteration => EquilibriumKind::Social,
        }
    }
}

/// Mutable state of one sweep iteration.
#[derive(Debug, Clone)]
pub struct IterationState {
    pub x: OffloadVector,
    pub sweep: usize,
    pub delta_x: f64,
}

fn check_capacity(b: f64) -> Result<()> {
    if b.is_nan() || b <= 0.0 {
        return Err(Error::Infeasible(format!(
            "residual edge capacity must be positive, got {b}"
        )));
    }
    Ok(())
}

/// Best response of the regulated selfish game given residual capacity `b`.
///
/// Returns 0 when the net demand is non-positive at 0+ or when `b` is below
/// the interior map's limit `c_t / ghat(0+)`; otherwise the unique interior
/// root of `F_N(x) = b`.
pub fn best_response_regulated(
    b: f64,
    u: &UserProfile,
    price: f64,
    cfg: &SystemConfig,
    ch: &dyn ChannelModel,
) -> Result<f64> {
    check_capacity(b)?;
    let ghat0 = model::demand_at_zero(u, cfg) - price;
    if ghat0 <= 0.0 || b <= u.c_t / ghat0 {
        return Ok(0.0);
    }
    let c_t = u.c_t;
    let lam = cfg.lambda_a;
    let f = |x: f64| {
        if x <= 0.0 {
            return c_t / ghat0 - b;
        }
        if x >= 1.0 {
            return f64::INFINITY;
        }
        let ghat = match model::demand(x, u, cfg, ch) {
            Ok(g) => g - price,
            Err(_) => return f64::INFINITY,
        };
        if ghat <= 0.0 {
            return f64::INFINITY;
        }
        let half = c_t / (2.0 * ghat);
        lam * x + half + (half * half + c_t * lam * x / ghat).sqrt() - b
    };
    let x = numerics::bisect(f, 0.0, 1.0, 1e-13, numerics::DEFAULT_MAX_ITER)?.x;
    // The box bound x <= 1 never binds: demand falls to -inf before 1.
    assert!(x < 1.0, "best response hit the upper box bound");
    if f(x).abs() >= 1e-9 {
        return Err(Error::Numerics(format!(
            "best-response residual {:.3e} exceeds 1e-9 at x = {x}",
            f(x).abs()
        )));
    }
    Ok(x)
}

/// Best response of the social game given residual capacity `b`: the unique
/// interior root of `F_S(x) = b`, or 0 when `b <= sqrt(c_t mu_b / g(0+))`.
pub fn best_response_social(
    b: f64,
    u: &UserProfile,
    cfg: &SystemConfig,
    ch: &dyn ChannelModel,
) -> Result<f64> {
    check_capacity(b)?;
    let g0 = model::demand_at_zero(u, cfg);
    let c_t = u.c_t;
    let mu_b = cfg.mu_b();
    if b <= (c_t * mu_b / g0).sqrt() {
        return Ok(0.0);
    }
    let lam = cfg.lambda_a;
    let f = |x: f64| {
        if x <= 0.0 {
            return (c_t * mu_b / g0).sqrt() - b;
        }
        if x >= 1.0 {
            return f64::INFINITY;
        }
        let g = model::demand(x, u, cfg, ch).unwrap_or(f64::NEG_INFINITY);
        if g <= 0.0 {
            return f64::INFINITY;
        }
        lam * x + (c_t * mu_b / g).sqrt() - b
    };
    let x = numerics::bisect(f, 0.0, 1.0, 1e-13, numerics::DEFAULT_MAX_ITER)?.x;
    assert!(x < 1.0, "best response hit the upper box bound");
    if f(x).abs() >= 1e-9 {
        return Err(Error::Numerics(format!(
            "best-response residual {:.3e} exceeds 1e-9 at x = {x}",
            f(x).abs()
        )));
    }
    Ok(x)
}

fn best_response(
    kind: GameKind,
    b: f64,
    u: &UserProfile,
    cfg: &SystemConfig,
    ch: &dyn ChannelModel,
) -> Result<f64> {
    match kind {
        GameKind::RegulatedSelfish { price } => best_response_regulated(b, u, price, cfg, ch),
        GameKind::SocialIteration => best_response_social(b, u, cfg, ch),
    }
}

/// Largest per-user first-order-condition residual of `xs` under `kind`.
/// Interior coordinates contribute `|lhs - rhs|` of their optimality
/// condition, corner coordinates only its violated part.
pub fn equilibrium_residual(
    xs: &OffloadVector,
    users: &[UserProfile],
    cfg: &SystemConfig,
    kind: GameKind,
    ch: &dyn ChannelModel,
) -> Result<f64> {
    let mu_b = cfg.mu_b();
    let total = xs.total_load(cfg);
    let denom = mu_b - total;
    if denom <= 0.0 {
        return Err(Error::Infeasible("unstable profile".into()));
    }
    let mut worst: f64 = 0.0;
    for (k, u) in users.iter().enumerate() {
        let x = xs[k];
        let rhs = match kind {
            GameKind::RegulatedSelfish { .. } => {
                let b_k = mu_b - (total - cfg.lambda_a * x);
                u.c_t * b_k / (denom * denom)
            }
            GameKind::SocialIteration => u.c_t * mu_b / (denom * denom),
        };
        let r = if x == 0.0 {
            (model::demand_at_zero(u, cfg) - kind.price() - rhs).max(0.0)
        } else {
            (model::demand(x, u, cfg, ch)? - kind.price() - rhs).abs()
        };
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Run the sweep iteration with explicit start, update order and sweep cap.
///
/// `order` must be a permutation of `0..users.len()`. The iteration stops
/// once the mean absolute per-user change of a sweep is at most
/// `cfg.epsilon`; exceeding `max_sweeps` is a [`Error::NonConvergence`]
/// carrying the trace so far.
pub fn run_gauss_seidel_with(
    users: &[UserProfile],
    cfg: &SystemConfig,
    ch: &dyn ChannelModel,
    kind: GameKind,
    x0: &OffloadVector,
    order: &[usize],
    max_sweeps: usize,
) -> Result<EquilibriumResult> {
    let n = users.len();
    if x0.len() != n {
        return Err(Error::InvalidConfig(format!(
            "start vector has {} entries for {} users",
            x0.len(),
            n
        )));
    }
    {
        let mut seen = vec![false; n];
        for &k in order {
            if k >= n || seen[k] {
                return Err(Error::InvalidConfig("order must be a permutation of users".into()));
            }
            seen[k] = true;
        }
        if order.len() != n {
            return Err(Error::InvalidConfig("order must be a permutation of users".into()));
        }
    }
    if !x0.is_stable(cfg) {
        return Err(Error::Infeasible("start vector overloads the edge".into()));
    }

    let mu_b = cfg.mu_b();
    let mut state = IterationState {
        x: x0.clone(),
        sweep: 0,
        delta_x: f64::INFINITY,
    };
    let mut x: Vec<f64> = x0.as_slice().to_vec();
    let mut load;
    let mut trace = Vec::new();

    while state.delta_x > cfg.epsilon {
        if state.sweep >= max_sweeps {
            return Err(Error::NonConvergence {
                sweeps: state.sweep,
                delta_x: state.delta_x,
                trace,
            });
        }
        // Resynchronize the incrementally tracked load once per sweep so
        // rounding drift cannot accumulate across long runs.
        load = cfg.lambda_a * x.iter().sum::<f64>();
        let mut delta = 0.0;
        for &k in order {
            let b = mu_b - (load - cfg.lambda_a * x[k]);
            let xk = best_response(kind, b, &users[k], cfg, ch)?;
            // Interior responses satisfy b - lam x > 0, so the edge stays
            // stable after every single-user update.
            load += cfg.lambda_a * (xk - x[k]);
            if load >= mu_b {
                return Err(Error::Infeasible(format!(
                    "edge overloaded after updating user {k}: load {load} >= {mu_b}"
                )));
            }
            delta += (xk - x[k]).abs();
            x[k] = xk;
        }
        state.delta_x = delta / n as f64;
        state.sweep += 1;
        state.x = OffloadVector::new(x.clone())?;
        trace.push(TraceRow {
            sweep: state.sweep,
            mean_x: state.x.mean(),
            delta_x: state.delta_x,
        });
    }

    let residual = equilibrium_residual(&state.x, users, cfg, kind, ch)?;
    let trivial = state.x.is_all_zero();
    Ok(EquilibriumResult {
        x: state.x,
        kind: kind.equilibrium_kind(),
        price: kind.price(),
        residual,
        iterations: state.sweep,
        trivial,
        converged: true,
        trace,
    })
}

/// Sweep iteration from the all-zero profile in ascending user order.
pub fn run_gauss_seidel(
    users: &[UserProfile],
    cfg: &SystemConfig,
    ch: &dyn ChannelModel,
    kind: GameKind,
) -> Result<EquilibriumResult> {
    let order: Vec<usize> = (0..users.len()).collect();
    run_gauss_seidel_with(
        users,
        cfg,
        ch,
        kind,
        &OffloadVector::zeros(users.len()),
        &order,
        DEFAULT_MAX_SWEEPS,
    )
}

/// Uniform congestion price read off a social-equilibrium profile:
/// `P = c_t * L / (mu_b - L)^2` with `L = sum_j lam x_j`.
pub fn uniform_price(se_vector: &OffloadVector, c_t: f64, cfg: &SystemConfig) -> Result<f64> {
    let load = se_vector.total_load(cfg);
    let slack = cfg.mu_b() - load;
    if slack <= 0.0 {
        return Err(Error::Infeasible(format!(
            "unstable vector: load {load} >= mu_b {}",
            cfg.mu_b()
        )));
    }
    Ok(c_t * load / (slack * slack))
}

/// Output of the two-phase pricing pipeline.
#[derive(Debug, Clone)]
pub struct PricedRun {
    pub social: EquilibriumResult,
    pub price: f64,
    pub regulated: EquilibriumResult,
}

/// Two-phase pipeline for pricing without closed forms: run the social
/// iteration, read the uniform price off its limit, then run the regulated
/// selfish game under that price.
pub fn solve_priced(
    users: &[UserProfile],
    cfg: &SystemConfig,
    ch: &dyn ChannelModel,
) -> Result<PricedRun> {
    let social = run_gauss_seidel(users, cfg, ch, GameKind::SocialIteration)?;
    let c_t = users.first().map_or(0.0, |u| u.c_t);
    let price = uniform_price(&social.x, c_t, cfg)?;
    let regulated = run_gauss_seidel(users, cfg, ch, GameKind::RegulatedSelfish { price })?;
    Ok(PricedRun {
        social,
        price,
        regulated,
    })
}
