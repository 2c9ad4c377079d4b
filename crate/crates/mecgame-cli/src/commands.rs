//! The four experiment commands. Each returns tables plus a status summary;
//! writing files and exit codes are handled by the binary entry point.

use anyhow::{anyhow, bail, Result};
use rayon::prelude::*;

use mecgame::engine::{self, GameKind};
use mecgame::homogeneous::{self, HomogeneousScenario};
use mecgame::model;
use mecgame::registry::SolverRegistry;
use mecgame::sim::{self, SimConfig, SimUser};
use mecgame::{ChannelModel, EquilibriumResult, Error, Rayleigh, SystemConfig, UserProfile};

use crate::scenario::ScenarioFile;
use crate::table::{Cell, ResultTable};

pub struct Outcome {
    pub tables: Vec<ResultTable>,
    pub status: String,
    pub sweeps: usize,
    pub residual: f64,
}

impl Outcome {
    fn ok(tables: Vec<ResultTable>, sweeps: usize, residual: f64) -> Self {
        Self {
            tables,
            status: "ok".into(),
            sweeps,
            residual,
        }
    }
}

fn channel() -> &'static dyn ChannelModel {
    &Rayleigh
}

/// Solve one equilibrium with a registry-selected strategy and tabulate the
/// per-user solution.
pub fn cmd_solve(sc: &ScenarioFile, solver: &str) -> Result<Outcome> {
    let cfg = sc.system_config()?;
    let users = sc.build_users()?;
    let name = if solver == "auto" {
        if sc.is_homogeneous() {
            "ne"
        } else {
            "gs-social"
        }
    } else {
        solver
    };
    let registry = SolverRegistry::with_builtin();
    let result = registry.get(name)?.solve(&users, &cfg, channel())?;

    let mut table = ResultTable::new(
        "solution",
        vec![
            "user",
            "d",
            "rho",
            "x",
            "beta",
            "utility",
            "congestion",
            "profit",
            "kind",
            "price",
        ],
    );
    for (k, u) in users.iter().enumerate() {
        let rho = u.snr(&cfg)?;
        let x = result.x[k];
        let beta = model::threshold_from_frequency(x, rho, channel())?;
        let parts = model::profit(k, &result.x, &users, &cfg, channel())?;
        table.push(vec![
            k.into(),
            u.d.into(),
            rho.into(),
            x.into(),
            beta.into(),
            parts.utility.into(),
            parts.congestion.into(),
            parts.profit.into(),
            result.kind.as_str().into(),
            result.price.into(),
        ]);
    }
    Ok(Outcome::ok(vec![table], result.iterations, result.residual))
}

struct NamedRun {
    label: &'static str,
    outcome: std::result::Result<EquilibriumResult, (usize, f64, Vec<mecgame::TraceRow>)>,
}

fn run_traced(
    label: &'static str,
    users: &[UserProfile],
    cfg: &SystemConfig,
    kind: GameKind,
) -> Result<NamedRun> {
    match engine::run_gauss_seidel(users, cfg, channel(), kind) {
        Ok(res) => Ok(NamedRun {
            label,
            outcome: Ok(res),
        }),
        Err(Error::NonConvergence {
            sweeps,
            delta_x,
            trace,
        }) => Ok(NamedRun {
            label,
            outcome: Err((sweeps, delta_x, trace)),
        }),
        Err(e) => Err(e.into()),
    }
}

/// Trace the best-response iteration under no price, under the aligning
/// price, and for the social rule, with closed-form reference lines when the
/// population is homogeneous.
pub fn cmd_converge(sc: &ScenarioFile) -> Result<Outcome> {
    let cfg = sc.system_config()?;
    let users = sc.build_users()?;

    let social = run_traced("social", &users, &cfg, GameKind::SocialIteration)?;

    let (ne_ref, se_ref, price) = if sc.is_homogeneous() {
        let s = HomogeneousScenario::new(users.len(), users[0].clone(), cfg.clone())?;
        let ne = homogeneous::solve_ne(&s, channel())?;
        let se = homogeneous::solve_se(&s, channel())?;
        let price = homogeneous::optimal_price(&s, channel())?;
        (Cell::Float(ne.x[0]), Cell::Float(se.x[0]), price)
    } else {
        let price = match &social.outcome {
            Ok(res) => engine::uniform_price(&res.x, users[0].c_t, &cfg)?,
            Err(_) => 0.0,
        };
        (Cell::Empty, Cell::Empty, price)
    };

    let p0 = run_traced("regulated-p0", &users, &cfg, GameKind::RegulatedSelfish { price: 0.0 })?;
    let popt = run_traced(
        "regulated-optimal",
        &users,
        &cfg,
        GameKind::RegulatedSelfish { price },
    )?;

    let mut table = ResultTable::new(
        "convergence",
        vec![
            "run",
            "price",
            "sweep",
            "mean_x",
            "delta_x",
            "status",
            "ne_reference",
            "se_reference",
        ],
    );
    let mut all_ok = true;
    let mut sweeps = 0usize;
    let mut residual = 0.0f64;
    for run in [&p0, &popt, &social] {
        let run_price = match run.label {
            "regulated-optimal" => price,
            _ => 0.0,
        };
        let (trace, status) = match &run.outcome {
            Ok(res) => {
                sweeps = sweeps.max(res.iterations);
                residual = residual.max(res.residual);
                (&res.trace, "converged")
            }
            Err((s, _, trace)) => {
                all_ok = false;
                sweeps = sweeps.max(*s);
                (trace, "max-sweeps")
            }
        };
        for row in trace {
            table.push(vec![
                run.label.into(),
                run_price.into(),
                row.sweep.into(),
                row.mean_x.into(),
                row.delta_x.into(),
                status.into(),
                ne_ref.clone(),
                se_ref.clone(),
            ]);
        }
    }

    Ok(Outcome {
        tables: vec![table],
        status: if all_ok { "ok" } else { "non-convergence" }.into(),
        sweeps,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    NUsers,
    Distance,
}

/// Equilibria, profits, delays and the aligning price across a grid of
/// population sizes or distances (homogeneous populations only).
pub fn cmd_sweep(sc: &ScenarioFile, axis: SweepAxis) -> Result<Outcome> {
    if !sc.is_homogeneous() {
        bail!("sweep requires a homogeneous scenario");
    }
    let cfg = sc.system_config()?;
    let base = sc.build_users()?[0].clone();

    let points: Vec<(String, usize, UserProfile)> = match axis {
        SweepAxis::NUsers => sc
            .n_grid()
            .into_iter()
            .map(|n| (n.to_string(), n, base.clone()))
            .collect(),
        SweepAxis::Distance => sc
            .d_grid()
            .into_iter()
            .map(|d| {
                let mut u = base.clone();
                u.d = d;
                u.rho = None;
                (format!("{d}"), sc.n_users(), u)
            })
            .collect(),
    };

    let axis_name = match axis {
        SweepAxis::NUsers => "n_users",
        SweepAxis::Distance => "distance",
    };

    let rows: Vec<(Vec<Cell>, bool)> = points
        .par_iter()
        .map(|(label, n, profile)| sweep_point(label, *n, profile, &cfg))
        .collect();

    let mut table = ResultTable::new(
        "sweep",
        vec![
            "axis",
            "value",
            "x_ne",
            "x_se",
            "price",
            "profit_ne",
            "profit_se",
            "profit_ratio",
            "local_delay_ne",
            "local_delay_se",
            "edge_delay_ne",
            "edge_delay_se",
            "status",
        ],
    );
    let mut all_ok = true;
    for (mut row, ok) in rows {
        row.insert(0, axis_name.into());
        table.push(row);
        all_ok &= ok;
    }
    Ok(Outcome {
        tables: vec![table],
        status: if all_ok { "ok" } else { "infeasible-points" }.into(),
        sweeps: 0,
        residual: 0.0,
    })
}

fn sweep_point(
    label: &str,
    n: usize,
    profile: &UserProfile,
    cfg: &SystemConfig,
) -> (Vec<Cell>, bool) {
    match sweep_point_inner(n, profile, cfg) {
        Ok(mut cells) => {
            let mut row = vec![Cell::Str(label.to_string())];
            row.append(&mut cells);
            (row, true)
        }
        Err(e) => {
            let mut row = vec![Cell::Str(label.to_string())];
            row.extend(std::iter::repeat_n(Cell::Empty, 10));
            row.push(Cell::Str(format!("infeasible: {e}")));
            (row, false)
        }
    }
}

fn sweep_point_inner(n: usize, profile: &UserProfile, cfg: &SystemConfig) -> Result<Vec<Cell>> {
    let mut cfg = cfg.clone();
    cfg.n_users = n;
    let s = HomogeneousScenario::new(n, profile.clone(), cfg.clone())?;
    let ne = homogeneous::solve_ne(&s, channel())?;
    let se = homogeneous::solve_se(&s, channel())?;
    let price = homogeneous::price_for_social_target(&s, &se, channel())?;
    let users = s.users();

    let stats = |res: &EquilibriumResult| -> Result<(f64, f64, Cell)> {
        let x = res.x[0];
        let profit = model::profit(0, &res.x, &users, &cfg, channel())?.profit;
        let local = model::local_cost(x, profile, &cfg)?.d_lc;
        let edge = if x > 0.0 {
            Cell::Float(1.0 / (cfg.mu_b() - res.x.total_load(&cfg)))
        } else {
            Cell::Empty
        };
        Ok((profit, local, edge))
    };
    let (profit_ne, local_ne, edge_ne) = stats(&ne)?;
    let (profit_se, local_se, edge_se) = stats(&se)?;

    let ratio = if profit_ne > 0.0 {
        Cell::Float(profit_se / profit_ne)
    } else {
        Cell::Empty
    };
    let status = if ne.trivial { "trivial" } else { "ok" };
    Ok(vec![
        ne.x[0].into(),
        se.x[0].into(),
        price.into(),
        profit_ne.into(),
        profit_se.into(),
        ratio,
        local_ne.into(),
        local_se.into(),
        edge_ne,
        edge_se,
        status.into(),
    ])
}

/// Simulate the queues at the solved social point and compare empirical
/// frequencies and sojourns against the analytic formulas.
pub fn cmd_simulate(sc: &ScenarioFile, seed: u64) -> Result<Outcome> {
    let cfg = sc.system_config()?;
    let users = sc.build_users()?;

    let se = if sc.is_homogeneous() {
        let s = HomogeneousScenario::new(users.len(), users[0].clone(), cfg.clone())?;
        homogeneous::solve_se(&s, channel())?
    } else {
        engine::run_gauss_seidel(&users, &cfg, channel(), GameKind::SocialIteration)?
    };

    let sim_users: Vec<SimUser> = users
        .iter()
        .enumerate()
        .map(|(k, u)| {
            Ok(SimUser {
                profile: u.clone(),
                beta: model::threshold_from_frequency(se.x[k], u.snr(&cfg)?, channel())?,
            })
        })
        .collect::<Result<_>>()?;

    let sim_cfg = SimConfig {
        horizon_slots: sc.horizon_slots(),
        warmup_slots: sc.warmup_slots(),
        seed,
        users: sim_users,
        cfg: cfg.clone(),
    };
    let report = sim::run_sim(&sim_cfg, channel())?;
    let checks = sim::validate_frequency(&sim_cfg, channel())?;

    let mut table = ResultTable::new(
        "simulate",
        vec![
            "scope",
            "user",
            "d",
            "frequency_analytic",
            "frequency_empirical",
            "frequency_gap_sigmas",
            "arrivals",
            "sojourn_analytic_s",
            "sojourn_empirical_s",
            "sojourn_rel_err",
            "ci95_half_width_s",
            "samples",
            "status",
        ],
    );

    let mut freq_ok = 0usize;
    let mut pooled_emp = 0.0;
    let mut pooled_ana = 0.0;
    let mut pooled_jobs = 0u64;
    for (k, (u, check)) in report.users.iter().zip(&checks).enumerate() {
        if check.within(3.0) {
            freq_ok += 1;
        }
        let x = se.x[k];
        let local_analytic = model::local_cost(x, &users[k], &cfg)?.d_lc;
        let measured = u.local.measured_jobs;
        pooled_emp += u.local.mean_sojourn * measured as f64;
        pooled_ana += local_analytic * measured as f64;
        pooled_jobs += measured;
        let (emp, rel, status): (Cell, Cell, &str) = if measured > 0 {
            let rel = (u.local.mean_sojourn - local_analytic).abs() / local_analytic;
            (u.local.mean_sojourn.into(), rel.into(), "ok")
        } else {
            (Cell::Empty, Cell::Empty, "n/a")
        };
        table.push(vec![
            "user".into(),
            k.into(),
            users[k].d.into(),
            check.analytic.into(),
            check.empirical.into(),
            if check.std_err > 0.0 && check.std_err.is_finite() {
                Cell::Float(check.gap / check.std_err)
            } else {
                Cell::Empty
            },
            u.arrivals.into(),
            local_analytic.into(),
            emp,
            rel,
            u.local.ci95_half_width.into(),
            measured.into(),
            status.into(),
        ]);
    }

    let load = se.x.total_load(&cfg);
    let edge_analytic = if load > 0.0 {
        Some(1.0 / (cfg.mu_b() - load))
    } else {
        None
    };
    let edge_measured = report.edge.measured_jobs;
    let edge_rel = match (edge_analytic, edge_measured > 0) {
        (Some(a), true) => Some((report.edge.mean_sojourn - a).abs() / a),
        _ => None,
    };
    table.push(vec![
        "edge".into(),
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        report.edge.arrivals.into(),
        edge_analytic.map_or(Cell::Empty, Cell::Float),
        if edge_measured > 0 {
            report.edge.mean_sojourn.into()
        } else {
            Cell::Empty
        },
        edge_rel.map_or(Cell::Empty, Cell::Float),
        report.edge.ci95_half_width.into(),
        edge_measured.into(),
        if edge_measured > 0 { "ok" } else { "n/a" }.into(),
    ]);

    // Validation verdict: frequencies within three binomial standard errors
    // for at least 95% of users; pooled local and edge sojourns within 5%.
    let n = users.len();
    let freq_pass = freq_ok * 100 >= 95 * n;
    let local_pass = pooled_jobs == 0 || (pooled_emp - pooled_ana).abs() / pooled_ana < 0.05;
    let edge_pass = edge_rel.is_none_or(|r| r < 0.05);

    let status = if freq_pass && local_pass && edge_pass {
        "ok".to_string()
    } else {
        let mut parts = Vec::new();
        if !freq_pass {
            parts.push("frequency");
        }
        if !local_pass {
            parts.push("local-sojourn");
        }
        if !edge_pass {
            parts.push("edge-sojourn");
        }
        format!("validation-failed: {}", parts.join(","))
    };

    Ok(Outcome {
        tables: vec![table],
        status,
        sweeps: se.iterations,
        residual: se.residual,
    })
}

/// Registered solver names with descriptions, for `mecgame solvers`.
pub fn solver_listing() -> Vec<(String, String)> {
    SolverRegistry::with_builtin()
        .iter()
        .map(|s| (s.name().to_string(), s.description().to_string()))
        .collect()
}

/// Validate a parsed scenario beyond the schema, for early error reporting.
pub fn preflight(sc: &ScenarioFile) -> Result<()> {
    sc.validate()
        .map_err(|e| anyhow!("scenario validation failed: {e:#}"))
}
