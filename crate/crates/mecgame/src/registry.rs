//! Named equilibrium-solver strategies.
//!
//! Every way of producing an equilibrium — closed forms for homogeneous
//! populations, the sweep iteration for anything else, and the two-phase
//! pricing pipeline — sits behind one trait and is picked by name at
//! runtime, so the CLI and scenario files select algorithms without code
//! changes.

use std::collections::BTreeMap;

use crate::channel::ChannelModel;
use crate::config::{SystemConfig, UserProfile};
use crate::engine::{self, GameKind};
use crate::error::{Error, Result};
use crate::homogeneous::{self, HomogeneousScenario};
use crate::result::EquilibriumResult;

/// An interchangeable equilibrium-solving algorithm.
pub trait EquilibriumSolver: Send + Sync {
    /// Registry key.
    fn name(&self) -> &'static str;

    /// One-line description for listings.
    fn description(&self) -> &'static str;

    fn solve(
        &self,
        users: &[UserProfile],
        cfg: &SystemConfig,
        ch: &dyn ChannelModel,
    ) -> Result<EquilibriumResult>;
}

fn require_homogeneous(users: &[UserProfile], cfg: &SystemConfig) -> Result<HomogeneousScenario> {
    let first = users
        .first()
        .ok_or_else(|| Error::InvalidConfig("no users".into()))?;
    if users.iter().any(|u| u != first) {
        return Err(Error::InvalidConfig(
            "closed-form solvers require identical users; use gs-social or gs-priced".into(),
        ));
    }
    HomogeneousScenario::new(users.len(), first.clone(), cfg.clone())
}

struct NashClosedForm;

impl EquilibriumSolver for NashClosedForm {
    fn name(&self) -> &'static str {
        "ne"
    }
    fn description(&self) -> &'static str {
        "closed-form Nash equilibrium (homogeneous users)"
    }
    fn solve(
        &self,
        users: &[UserProfile],
        cfg: &SystemConfig,
        ch: &dyn ChannelModel,
    ) -> Result<EquilibriumResult> {
        homogeneous::solve_ne(&require_homogeneous(users, cfg)?, ch)
    }
}

struct SocialClosedForm;

impl EquilibriumSolver for SocialClosedForm {
    fn name(&self) -> &'static str {
        "se"
    }
    fn description(&self) -> &'static str {
        "closed-form Social equilibrium (homogeneous users)"
    }
    fn solve(
        &self,
        users: &[UserProfile],
        cfg: &SystemConfig,
        ch: &dyn ChannelModel,
    ) -> Result<EquilibriumResult> {
        homogeneous::solve_se(&require_homogeneous(users, cfg)?, ch)
    }
}

struct GaussSeidelRegulated;

impl EquilibriumSolver for GaussSeidelRegulated {
    fn name(&self) -> &'static str {
        "gs-regulated"
    }
    fn description(&self) -> &'static str {
        "best-response sweeps for the selfish game at the configured price"
    }
    fn solve(
        &self,
        users: &[UserProfile],
        cfg: &SystemConfig,
        ch: &dyn ChannelModel,
    ) -> Result<EquilibriumResult> {
        engine::run_gauss_seidel(users, cfg, ch, GameKind::RegulatedSelfish { price: cfg.price })
    }
}

struct GaussSeidelSocial;

impl EquilibriumSolver for GaussSeidelSocial {
    fn name(&self) -> &'static str {
        "gs-social"
    }
    fn description(&self) -> &'static str {
        "best-response sweeps for the sum-profit game"
    }
    fn solve(
        &self,
        users: &[UserProfile],
        cfg: &SystemConfig,
        ch: &dyn ChannelModel,
    ) -> Result<EquilibriumResult> {
        engine::run_gauss_seidel(users, cfg, ch, GameKind::SocialIteration)
    }
}

struct PricedPipeline;

impl EquilibriumSolver for PricedPipeline {
    fn name(&self) -> &'static str {
        "gs-priced"
    }
    fn description(&self) -> &'static str {
        "social sweeps, then the regulated game under the uniform congestion price"
    }
    fn solve(
        &self,
        users: &[UserProfile],
        cfg: &SystemConfig,
        ch: &dyn ChannelModel,
    ) -> Result<EquilibriumResult> {
        Ok(engine::solve_priced(users, cfg, ch)?.regulated)
    }
}

/// Name-keyed collection of solver strategies.
pub struct SolverRegistry {
    solvers: BTreeMap<&'static str, Box<dyn EquilibriumSolver>>,
}

impl SolverRegistry {
    pub fn empty() -> Self {
        Self {
            solvers: BTreeMap::new(),
        }
    }

    /// Registry preloaded with the built-in strategies.
    pub fn with_builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(NashClosedForm));
        r.register(Box::new(SocialClosedForm));
        r.register(Box::new(GaussSeidelRegulated));
        r.register(Box::new(GaussSeidelSocial));
        r.register(Box::new(PricedPipeline));
        r
    }

    /// Insert or replace a solver under its own name.
    pub fn register(&mut self, solver: Box<dyn EquilibriumSolver>) {
        self.solvers.insert(solver.name(), solver);
    }

    pub fn get(&self, name: &str) -> Result<&dyn EquilibriumSolver> {
        self.solvers
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownSolver {
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.solvers.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn EquilibriumSolver> {
        self.solvers.values().map(|b| b.as_ref())
    }
}

impl Default for SolverRegistry {
    fn default() -> Self {
        Self::with_builtin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Rayleigh;
    use crate::testutil::section_v;

    #[test]
    fn builtin_names() {
        let r = SolverRegistry::with_builtin();
        assert_eq!(r.names(), vec!["gs-priced", "gs-regulated", "gs-social", "ne", "se"]);
        assert!(matches!(r.get("nope"), Err(Error::UnknownSolver { .. })));
    }

    #[test]
    fn closed_form_rejects_heterogeneous_users() {
        let r = SolverRegistry::with_builtin();
        let (cfg, user) = section_v(2);
        let mut other = user.clone();
        other.d = 20.0;
        other.rho = None;
        let users = vec![user, other];
        assert!(r.get("ne").unwrap().solve(&users, &cfg, &Rayleigh).is_err());
        assert!(r.get("gs-social").unwrap().solve(&users, &cfg, &Rayleigh).is_ok());
    }

    #[test]
    fn named_solvers_agree_on_homogeneous_case() {
        let r = SolverRegistry::with_builtin();
        let (cfg, user) = section_v(50);
        let users = vec![user; 50];
        let ne = r.get("ne").unwrap().solve(&users, &cfg, &Rayleigh).unwrap();
        let gs = r
            .get("gs-regulated")
            .unwrap()
            .solve(&users, &cfg, &Rayleigh)
            .unwrap();
        assert!((ne.x[0] - gs.x[0]).abs() < 1e-3);
        let se = r.get("se").unwrap().solve(&users, &cfg, &Rayleigh).unwrap();
        let priced = r.get("gs-priced").unwrap().solve(&users, &cfg, &Rayleigh).unwrap();
        assert!((se.x[0] - priced.x[0]).abs() < 2e-3);
        assert!(priced.price > 0.0);
    }
}
