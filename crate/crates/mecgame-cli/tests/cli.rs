//! End-to-end tests driving the compiled binary: exit codes, table
//! contents, trend checks and byte-level reproducibility.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_mecgame")
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(binary()).args(args).output().unwrap()
}

fn homogeneous_scenario(n: usize, extra_system: &str, experiment: &str) -> String {
    format!(
        r#"
[system]
t0 = 1e-3
lambda_a = 0.6
mu_a = 1e8
la_mua = 100.0
p_t = 0.1
sigma2 = 1e-7
alpha = 3.5
f_b = 3e9
{extra_system}

[users.homogeneous]
n = {n}
d = 50.0
rho = 0.89
c_t = 0.9
c_e = 0.1
f_m = 1e8
kappa_m = 1e-26

[experiment]
{experiment}
"#
    )
}

fn heterogeneous_scenario(n: usize, seed: u64, extra_system: &str) -> String {
    format!(
        r#"
[system]
t0 = 1e-3
lambda_a = 0.6
mu_a = 1e8
la_mua = 100.0
p_t = 0.1
sigma2 = 1e-7
alpha = 3.5
f_b = 3e9
{extra_system}

[users.heterogeneous]
n = {n}
r_min = 10.0
r_max = 75.0
seed = {seed}
c_t = 0.9
c_e = 0.1
f_m = 1e8
kappa_m = 1e-26
"#
    )
}

/// CSV rows as column-name -> string maps.
fn read_csv(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let headers: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    reader
        .records()
        .map(|r| {
            headers
                .iter()
                .cloned()
                .zip(r.unwrap().iter().map(String::from))
                .collect()
        })
        .collect()
}

fn status(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path.join("status.json")).unwrap()).unwrap()
}

#[test]
fn converge_homogeneous_lands_on_closed_forms() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "s.toml",
        &homogeneous_scenario(50, "", "kind = \"convergence\""),
    );
    let out = dir.path().join("out");
    let res = run(&[
        "converge",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let rows = read_csv(&out.join("convergence.csv"));
    let last = |run: &str| rows.iter().rfind(|r| r["run"] == run).unwrap().clone();
    let p0 = last("regulated-p0");
    let popt = last("regulated-optimal");
    let ne_ref: f64 = p0["ne_reference"].parse().unwrap();
    let se_ref: f64 = p0["se_reference"].parse().unwrap();
    let p0_final: f64 = p0["mean_x"].parse().unwrap();
    let popt_final: f64 = popt["mean_x"].parse().unwrap();
    assert!((p0_final - ne_ref).abs() < 1e-3, "{p0_final} vs NE {ne_ref}");
    assert!((popt_final - se_ref).abs() < 1e-3, "{popt_final} vs SE {se_ref}");
    assert_eq!(p0["status"], "converged");
    assert_eq!(status(&out)["status"], "ok");
}

#[test]
fn converge_single_user_traces_coincide() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(dir.path(), "s.toml", &homogeneous_scenario(1, "", ""));
    let out = dir.path().join("out");
    assert!(run(&[
        "converge",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
    .status
    .success());

    let rows = read_csv(&out.join("convergence.csv"));
    let trace = |run: &str| -> Vec<f64> {
        rows.iter()
            .filter(|r| r["run"] == run)
            .map(|r| r["mean_x"].parse().unwrap())
            .collect()
    };
    let (a, b, c) = (
        trace("regulated-p0"),
        trace("regulated-optimal"),
        trace("social"),
    );
    assert_eq!(a.len(), b.len());
    assert_eq!(a.len(), c.len());
    for i in 0..a.len() {
        assert!((a[i] - b[i]).abs() < 1e-9);
        assert!((a[i] - c[i]).abs() < 1e-9);
    }
}

#[test]
fn converge_heterogeneous_priced_run_shares_social_limit() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "s.toml",
        &heterogeneous_scenario(50, 3, "epsilon = 1e-6"),
    );
    let out = dir.path().join("out");
    assert!(run(&[
        "converge",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
    .status
    .success());

    let rows = read_csv(&out.join("convergence.csv"));
    let last = |run: &str| -> f64 {
        rows.iter().rfind(|r| r["run"] == run).unwrap()["mean_x"]
            .parse()
            .unwrap()
    };
    assert!((last("regulated-optimal") - last("social")).abs() < 1e-3);
    // No closed-form references for heterogeneous populations.
    assert_eq!(rows[0]["ne_reference"], "");
}

#[test]
fn sweep_over_population_size_has_expected_trends() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(dir.path(), "s.toml", &homogeneous_scenario(50, "", ""));
    let out = dir.path().join("out");
    assert!(run(&[
        "sweep",
        "--axis",
        "n",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
    .status
    .success());

    let rows = read_csv(&out.join("sweep.csv"));
    assert_eq!(rows.len(), 5); // default grid 1/10/50/100/200
    let mut prev_ratio = 0.0f64;
    for row in &rows {
        assert_eq!(row["status"], "ok");
        let ratio: f64 = row["profit_ratio"].parse().unwrap();
        assert!(ratio >= 1.0 - 1e-9, "ratio {ratio} below 1");
        assert!(ratio >= prev_ratio - 1e-9, "ratio not non-decreasing");
        prev_ratio = ratio;
        let x_ne: f64 = row["x_ne"].parse().unwrap();
        let x_se: f64 = row["x_se"].parse().unwrap();
        assert!(x_ne >= x_se);
    }
    // A lone user pays no price and the two equilibria coincide.
    assert_eq!(rows[0]["value"], "1");
    let p1: f64 = rows[0]["price"].parse().unwrap();
    assert_eq!(p1, 0.0);
}

#[test]
fn sweep_over_distance_decreases_offloading() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(dir.path(), "s.toml", &homogeneous_scenario(50, "", ""));
    let out = dir.path().join("out");
    assert!(run(&[
        "sweep",
        "--axis",
        "d",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
    .status
    .success());

    let rows = read_csv(&out.join("sweep.csv"));
    assert_eq!(rows.len(), 4); // default grid 10/30/50/70 m
    let mut prev = f64::INFINITY;
    for row in &rows {
        let x_ne: f64 = row["x_ne"].parse().unwrap();
        assert!(x_ne < prev, "offloading not decreasing in distance");
        prev = x_ne;
    }
}

#[test]
fn simulate_validates_and_reruns_identically() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "s.toml",
        &homogeneous_scenario(
            20,
            "",
            "horizon_slots = 10000000\nwarmup_slots = 1000000\nseed = 16",
        ),
    );
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    for out in [&out1, &out2] {
        let res = run(&[
            "simulate",
            "--scenario",
            scenario.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    }
    let a = std::fs::read(out1.join("simulate.csv")).unwrap();
    let b = std::fs::read(out2.join("simulate.csv")).unwrap();
    assert_eq!(a, b, "seeded reruns must byte-match");

    let rows = read_csv(&out1.join("simulate.csv"));
    assert_eq!(rows.len(), 21); // 20 users + edge row
    let edge = rows.last().unwrap();
    assert_eq!(edge["scope"], "edge");
    assert_eq!(edge["status"], "ok");
    let rel: f64 = edge["sojourn_rel_err"].parse().unwrap();
    assert!(rel < 0.05);
    assert_eq!(status(&out1)["status"], "ok");
}

#[test]
fn simulate_zero_offload_marks_edge_na() {
    let dir = TempDir::new().unwrap();
    // mu_b = 0.1 makes offloading worthless; the social point is all-zero.
    let scenario = write_scenario(
        dir.path(),
        "s.toml",
        &homogeneous_scenario(5, "", "horizon_slots = 200000\nseed = 4")
            .replace("f_b = 3e9", "f_b = 1e7"),
    );
    let out = dir.path().join("out");
    let res = run(&[
        "simulate",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let rows = read_csv(&out.join("simulate.csv"));
    let edge = rows.last().unwrap();
    assert_eq!(edge["status"], "n/a");
    assert_eq!(edge["sojourn_empirical_s"], "");
    assert_eq!(edge["arrivals"], "0");
}

#[test]
fn solve_writes_json_tables() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(dir.path(), "s.toml", &homogeneous_scenario(10, "", ""));
    let out = dir.path().join("out");
    let res = run(&[
        "solve",
        "--solver",
        "se",
        "--format",
        "json",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let rows: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("solution.json")).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 10);
    assert_eq!(rows[0]["kind"], "social");
    assert!(rows[0]["x"].as_f64().unwrap() > 0.0);
    let st = status(&out);
    assert_eq!(st["status"], "ok");
    assert!(st["meta"]["version"].is_string());
}

#[test]
fn unknown_solver_fails_with_status() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(dir.path(), "s.toml", &homogeneous_scenario(5, "", ""));
    let out = dir.path().join("out");
    let res = run(&[
        "solve",
        "--solver",
        "does-not-exist",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!res.status.success());
    let st = status(&out);
    assert!(st["status"].as_str().unwrap().starts_with("error"));
}

#[test]
fn invalid_scenario_fails_with_status() {
    let dir = TempDir::new().unwrap();
    let text = homogeneous_scenario(5, "", "") + "\n[users.heterogeneous]\nn = 2\nr_min = 1.0\nr_max = 2.0\nseed = 1\nc_t = 0.5\nc_e = 0.5\nf_m = 1e8\nkappa_m = 1e-26\n";
    let scenario = write_scenario(dir.path(), "s.toml", &text);
    let out = dir.path().join("out");
    let res = run(&[
        "converge",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!res.status.success());
    assert!(status(&out)["status"].as_str().unwrap().starts_with("error"));
}

#[test]
fn solvers_listing_names_strategies() {
    let res = run(&["solvers"]);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    for name in ["ne", "se", "gs-regulated", "gs-social", "gs-priced"] {
        assert!(text.contains(name), "missing {name} in listing");
    }
}

#[test]
fn seed_flag_overrides_scenario_seed() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "s.toml",
        &homogeneous_scenario(5, "", "horizon_slots = 200000\nseed = 1"),
    );
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    // Exit status is not asserted here: at this tiny horizon the 5%
    // validation verdict is seed luck; only the seed plumbing is under test.
    run(&[
        "simulate",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out1.to_str().unwrap(),
        "--seed",
        "99",
    ]);
    run(&[
        "simulate",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out2.to_str().unwrap(),
    ]);
    let a = std::fs::read(out1.join("simulate.csv")).unwrap();
    let b = std::fs::read(out2.join("simulate.csv")).unwrap();
    assert_ne!(a, b);
    assert_eq!(status(&out1)["meta"]["seed"], 99);
}
