use crate::result::TraceRow;

/// Errors produced by model evaluation and the solvers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A queue would be unstable or a capacity constraint is violated.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A configuration value violates a structural invariant.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Bisection was asked to search an interval with no sign change.
    #[error("no sign change on [{lo}, {hi}] (f(lo)={flo}, f(hi)={fhi})")]
    NoBracket { lo: f64, hi: f64, flo: f64, fhi: f64 },

    /// A function evaluated to NaN during root finding.
    #[error("numerical failure: {0}")]
    Numerics(String),

    /// The best-response iteration hit its sweep limit. The trace taken so
    /// far is attached so callers can surface oscillation diagnostics.
    #[error("no convergence after {sweeps} sweeps (last delta_x = {delta_x:.3e})")]
    NonConvergence {
        sweeps: usize,
        delta_x: f64,
        trace: Vec<TraceRow>,
    },

    /// Requested solver name is not registered.
    #[error("unknown solver `{name}` (available: {available})")]
    UnknownSolver { name: String, available: String },
}

pub type Result<T> = std::result::Result<T, Error>;
