//! Solver output types shared by the closed-form and iterative paths.

use serde::{Deserialize, Serialize};

use crate::model::OffloadVector;

/// Which game the solution is an equilibrium of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumKind {
    /// Selfish game, no price.
    Nash,
    /// Sum-profit game.
    Social,
    /// Selfish game regulated by a per-unit offloading price.
    RegulatedNash,
}

impl EquilibriumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EquilibriumKind::Nash => "nash",
            EquilibriumKind::Social => "social",
            EquilibriumKind::RegulatedNash => "regulated-nash",
        }
    }
}

/// One sweep of the best-response iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// 1-based sweep index.
    pub sweep: usize,
    /// Mean offloading frequency after the sweep.
    pub mean_x: f64,
    /// Mean absolute per-user change over the sweep.
    pub delta_x: f64,
}

/// An equilibrium solution together with solver diagnostics.
///
/// `residual` is the largest per-user first-order-condition residual of the
/// final vector (corner coordinates contribute the amount by which their
/// optimality condition is violated, zero when genuinely optimal). For
/// closed-form solvers this is machine-small; for the sweep iteration it
/// scales with the stopping threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub x: OffloadVector,
    pub kind: EquilibriumKind,
    /// Price in force when solving (0 for unregulated games).
    pub price: f64,
    pub residual: f64,
    /// Bisection iterations (closed form) or sweeps (iteration).
    pub iterations: usize,
    /// The all-zero equilibrium returned when no positive one exists.
    pub trivial: bool,
    pub converged: bool,
    /// Per-sweep history; empty for closed-form solvers.
    pub trace: Vec<TraceRow>,
}
