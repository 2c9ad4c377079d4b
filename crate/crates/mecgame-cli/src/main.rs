use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mecgame_cli::commands::{self, Outcome, SweepAxis};
use mecgame_cli::scenario::ScenarioFile;
use mecgame_cli::table::{OutputFormat, RunMeta, StatusReport};

/// Equilibria and queueing validation for a multi-user edge-offloading game.
#[derive(Parser)]
#[command(name = "mecgame", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for tables and status.json (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Overrides the scenario's experiment seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Table format.
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    N,
    D,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one equilibrium with a named solver strategy.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Solver name (see `mecgame solvers`); `auto` picks the closed
        /// form for homogeneous populations and gs-social otherwise.
        #[arg(long, default_value = "auto")]
        solver: String,
    },
    /// Trace the best-response iteration for no price, the aligning price
    /// and the social rule.
    Converge {
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate equilibria across a grid of population sizes or distances.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        axis: AxisArg,
    },
    /// Simulate the queues at the social point and compare against the
    /// analytic delay formulas.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// List the registered solver strategies.
    Solvers,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let started = Instant::now();
    let (common, outcome) = match &cli.command {
        Command::Solvers => {
            for (name, desc) in commands::solver_listing() {
                println!("{name:14} {desc}");
            }
            return Ok(true);
        }
        Command::Solve { common, solver } => (
            common,
            load(common).and_then(|sc| commands::cmd_solve(&sc, solver)),
        ),
        Command::Converge { common } => {
            (common, load(common).and_then(|sc| commands::cmd_converge(&sc)))
        }
        Command::Sweep { common, axis } => {
            let axis = match axis {
                AxisArg::N => SweepAxis::NUsers,
                AxisArg::D => SweepAxis::Distance,
            };
            (
                common,
                load(common).and_then(|sc| commands::cmd_sweep(&sc, axis)),
            )
        }
        Command::Simulate { common } => (
            common,
            load(common).and_then(|sc| {
                let seed = sc.effective_seed(common.seed);
                commands::cmd_simulate(&sc, seed)
            }),
        ),
    };

    std::fs::create_dir_all(&common.out)
        .with_context(|| format!("creating {}", common.out.display()))?;
    let seed = ScenarioFile::load(&common.scenario)
        .map(|sc| sc.effective_seed(common.seed))
        .unwrap_or_default();

    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => Outcome {
            tables: Vec::new(),
            status: format!("error: {e:#}"),
            sweeps: 0,
            residual: 0.0,
        },
    };

    for table in &outcome.tables {
        let path = table.write(&common.out, common.format.into())?;
        eprintln!("wrote {}", path.display());
    }
    let status = StatusReport {
        status: outcome.status,
        sweeps: outcome.sweeps,
        residual: outcome.residual,
        wall_time_ms: started.elapsed().as_millis(),
        meta: RunMeta {
            version: option_env!("MECGAME_GIT_DESCRIBE")
                .unwrap_or(env!("CARGO_PKG_VERSION"))
                .to_string(),
            seed,
            timestamp_ms: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis())
                .unwrap_or_default(),
        },
    };
    let path = status.write(&common.out)?;
    eprintln!("wrote {}", path.display());
    if !status.ok() {
        eprintln!("status: {}", status.status);
    }
    Ok(status.ok())
}

fn load(common: &Common) -> Result<ScenarioFile> {
    let sc = ScenarioFile::load(&common.scenario)?;
    commands::preflight(&sc)?;
    Ok(sc)
}
