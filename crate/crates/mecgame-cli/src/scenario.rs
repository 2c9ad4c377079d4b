//! Scenario files: a TOML document with `[system]`, `[users.*]` and
//! `[experiment]` sections. The schema is validated before any computation
//! and round-trips through serialization unchanged.

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use mecgame::{SystemConfig, UserProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub system: SystemSection,
    pub users: UsersSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub t0: f64,
    pub lambda_a: f64,
    pub mu_a: f64,
    pub la_mua: f64,
    pub p_t: f64,
    pub sigma2: f64,
    pub alpha: f64,
    pub f_b: f64,
    /// Defaults to `t0` (rate thresholds read as nats per slot).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_unit_scale: Option<f64>,
    #[serde(default)]
    pub price: f64,
    /// Defaults to 1e-3.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UsersSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub homogeneous: Option<HomogeneousUsers>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heterogeneous: Option<HeterogeneousUsers>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomogeneousUsers {
    pub n: usize,
    pub d: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    pub c_t: f64,
    pub c_e: f64,
    pub f_m: f64,
    pub kappa_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeterogeneousUsers {
    pub n: usize,
    /// Ring radii; distances are drawn uniformly from [r_min, r_max].
    pub r_min: f64,
    pub r_max: f64,
    /// Placement seed; part of the population definition.
    pub seed: u64,
    pub c_t: f64,
    pub c_e: f64,
    pub f_m: f64,
    pub kappa_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Convergence,
    SweepN,
    SweepD,
    Delays,
    SimValidate,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExperimentKind>,
    /// Population sizes for `sweep --axis n`; defaults to 1/10/50/100/200.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    /// Distances for `sweep --axis d`; defaults to 10/30/50/70 m.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon_slots: Option<u64>,
    /// Defaults to a tenth of the horizon.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warmup_slots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

pub const DEFAULT_N_GRID: &[usize] = &[1, 10, 50, 100, 200];
pub const DEFAULT_D_GRID: &[f64] = &[10.0, 30.0, 50.0, 70.0];
pub const DEFAULT_HORIZON_SLOTS: u64 = 10_000_000;

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading scenario {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let sc: ScenarioFile = toml::from_str(text).context("parsing scenario")?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.users.homogeneous, &self.users.heterogeneous) {
            (Some(_), Some(_)) => bail!("scenario defines both homogeneous and heterogeneous users"),
            (None, None) => bail!("scenario defines no users"),
            _ => {}
        }
        if let Some(h) = &self.users.heterogeneous {
            if !(h.r_min > 0.0 && h.r_min < h.r_max) {
                bail!("ring radii must satisfy 0 < r_min < r_max, got [{}, {}]", h.r_min, h.r_max);
            }
            if h.n == 0 {
                bail!("heterogeneous user count must be positive");
            }
        }
        if let Some(h) = &self.users.homogeneous {
            if h.n == 0 {
                bail!("homogeneous user count must be positive");
            }
        }
        let cfg = self.system_config()?;
        cfg.validate()?;
        for (k, u) in self.build_users()?.iter().enumerate() {
            u.validate(&cfg)
                .with_context(|| format!("user {k} is infeasible"))?;
        }
        Ok(())
    }

    pub fn n_users(&self) -> usize {
        self.users
            .homogeneous
            .as_ref()
            .map(|h| h.n)
            .or_else(|| self.users.heterogeneous.as_ref().map(|h| h.n))
            .unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.users.homogeneous.is_some()
    }

    pub fn system_config(&self) -> Result<SystemConfig> {
        let s = &self.system;
        Ok(SystemConfig {
            t0: s.t0,
            lambda_a: s.lambda_a,
            mu_a: s.mu_a,
            la_mua: s.la_mua,
            p_t: s.p_t,
            sigma2: s.sigma2,
            alpha: s.alpha,
            f_b: s.f_b,
            rate_unit_scale: s.rate_unit_scale.unwrap_or(s.t0),
            price: s.price,
            epsilon: s.epsilon.unwrap_or(1e-3),
            n_users: self.n_users(),
        })
    }

    /// Materialize the user population. Heterogeneous distances are drawn
    /// from the placement seed recorded in the scenario.
    pub fn build_users(&self) -> Result<Vec<UserProfile>> {
        if let Some(h) = &self.users.homogeneous {
            let u = UserProfile {
                d: h.d,
                rho: h.rho,
                c_t: h.c_t,
                c_e: h.c_e,
                f_m: h.f_m,
                kappa_m: h.kappa_m,
            };
            return Ok(vec![u; h.n]);
        }
        let h = self.users.heterogeneous.as_ref().expect("validated");
        let mut rng = ChaCha12Rng::seed_from_u64(h.seed);
        Ok((0..h.n)
            .map(|_| UserProfile {
                d: h.r_min + rng.random::<f64>() * (h.r_max - h.r_min),
                rho: None,
                c_t: h.c_t,
                c_e: h.c_e,
                f_m: h.f_m,
                kappa_m: h.kappa_m,
            })
            .collect())
    }

    /// Simulation/draw seed: the command-line override wins, then the
    /// experiment section, then zero.
    pub fn effective_seed(&self, cli_seed: Option<u64>) -> u64 {
        cli_seed.or(self.experiment.seed).unwrap_or(0)
    }

    pub fn horizon_slots(&self) -> u64 {
        self.experiment
            .horizon_slots
            .unwrap_or(DEFAULT_HORIZON_SLOTS)
    }

    pub fn warmup_slots(&self) -> u64 {
        self.experiment
            .warmup_slots
            .unwrap_or_else(|| self.horizon_slots() / 10)
    }

    pub fn n_grid(&self) -> Vec<usize> {
        self.experiment
            .n_grid
            .clone()
            .unwrap_or_else(|| DEFAULT_N_GRID.to_vec())
    }

    pub fn d_grid(&self) -> Vec<f64> {
        self.experiment
            .d_grid
            .clone()
            .unwrap_or_else(|| DEFAULT_D_GRID.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const HOMOGENEOUS_EXAMPLE: &str = r#"
[system]
t0 = 1e-3
lambda_a = 0.6
mu_a = 1e8
la_mua = 100.0
p_t = 0.1
sigma2 = 1e-7
alpha = 3.5
f_b = 3e9

[users.homogeneous]
n = 50
d = 50.0
rho = 0.89
c_t = 0.9
c_e = 0.1
f_m = 1e8
kappa_m = 1e-26

[experiment]
kind = "convergence"
seed = 7
"#;

    #[test]
    fn parse_serialize_parse_is_identity() {
        let a = ScenarioFile::parse(HOMOGENEOUS_EXAMPLE).unwrap();
        let text = a.to_toml().unwrap();
        let b = ScenarioFile::parse(&text).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn defaults_fill_in() {
        let sc = ScenarioFile::parse(HOMOGENEOUS_EXAMPLE).unwrap();
        let cfg = sc.system_config().unwrap();
        assert_eq!(cfg.rate_unit_scale, 1e-3);
        assert_eq!(cfg.epsilon, 1e-3);
        assert_eq!(cfg.price, 0.0);
        assert_eq!(cfg.n_users, 50);
        assert_eq!(sc.n_grid(), vec![1, 10, 50, 100, 200]);
        assert_eq!(sc.effective_seed(None), 7);
        assert_eq!(sc.effective_seed(Some(9)), 9);
    }

    #[test]
    fn rejects_unknown_fields() {
        let bad = HOMOGENEOUS_EXAMPLE.replace("kind = \"convergence\"", "kindd = \"convergence\"");
        assert!(ScenarioFile::parse(&bad).is_err());
    }

    #[test]
    fn rejects_two_user_sections() {
        let extra = format!(
            "{HOMOGENEOUS_EXAMPLE}
[users.heterogeneous]
n = 5
r_min = 10.0
r_max = 75.0
seed = 1
c_t = 0.9
c_e = 0.1
f_m = 1e8
kappa_m = 1e-26
"
        );
        assert!(ScenarioFile::parse(&extra).is_err());
    }

    #[test]
    fn rejects_bad_ring() {
        let text = HOMOGENEOUS_EXAMPLE.replace(
            "[users.homogeneous]\nn = 50\nd = 50.0\nrho = 0.89",
            "[users.heterogeneous]\nn = 50\nr_min = 75.0\nr_max = 10.0\nseed = 1",
        );
        assert!(ScenarioFile::parse(&text).is_err());
    }

    #[test]
    fn heterogeneous_placement_is_seeded() {
        let text = HOMOGENEOUS_EXAMPLE.replace(
            "[users.homogeneous]\nn = 50\nd = 50.0\nrho = 0.89",
            "[users.heterogeneous]\nn = 50\nr_min = 10.0\nr_max = 75.0\nseed = 1",
        );
        let sc = ScenarioFile::parse(&text).unwrap();
        let a = sc.build_users().unwrap();
        let b = sc.build_users().unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|u| (10.0..=75.0).contains(&u.d)));
        assert!(a.iter().any(|u| u.d != a[0].d));
    }
}
