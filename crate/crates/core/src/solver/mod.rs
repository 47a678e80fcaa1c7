//! LP and MILP solvers for [`MilpModel`]s.
//!
//! `solve_lp` runs the bounded-variable revised simplex on the relaxation;
//! `solve_milp` wraps it in best-bound branch-and-bound over the binaries.

mod bnb;
mod lp_format;
mod lu;
mod simplex;

use serde::{Deserialize, Serialize};

use crate::formulation::MilpModel;

pub use bnb::{branch_select, solve_milp, solve_milp_with, MilpOptions};
pub use lp_format::write_lp;

/// Every tolerance used by the solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Row and bound violation accepted as feasible.
    pub feasibility: f64,
    /// Distance from an integer accepted as integral.
    pub integrality: f64,
    /// Relative optimality gap at which branch-and-bound stops.
    pub relative_gap: f64,
    /// Reduced-cost threshold for optimality.
    pub optimality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feasibility: 1e-7,
            integrality: 1e-6,
            relative_gap: 1e-6,
            optimality: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Node limit reached before the gap closed.
    GapLimit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::GapLimit => "gap_limit",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("simplex iteration limit reached after {iterations} iterations")]
    IterationLimit { iterations: usize },
    #[error("numerical trouble: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural values; empty unless optimal.
    pub values: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

/// Result of a MILP solve, ready for [`crate::formulation::extract_dispatch`].
#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: SolveStatus,
    /// Incumbent values; empty when there is none.
    pub values: Vec<f64>,
    /// Incumbent objective (`+inf` without one).
    pub objective: f64,
    /// Proven lower bound.
    pub bound: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
}

impl MilpSolution {
    /// Relative gap between incumbent and bound.
    pub fn gap(&self) -> f64 {
        relative_gap(self.objective, self.bound)
    }
}

pub(crate) fn relative_gap(incumbent: f64, bound: f64) -> f64 {
    if !incumbent.is_finite() {
        return f64::INFINITY;
    }
    ((incumbent - bound) / incumbent.abs().max(1.0)).max(0.0)
}

/// Solves the LP relaxation of `m` (binaries relaxed to [0, 1]).
pub fn solve_lp(m: &MilpModel) -> Result<LpSolution, SolverError> {
    solve_lp_with(m, Tolerances::default())
}

pub fn solve_lp_with(m: &MilpModel, tol: Tolerances) -> Result<LpSolution, SolverError> {
    let mut sx = simplex::Simplex::new(m, tol);
    let outcome = sx.solve_cold()?;
    Ok(lp_solution(&sx, outcome))
}

fn lp_solution(sx: &simplex::Simplex, outcome: simplex::Outcome) -> LpSolution {
    match outcome {
        simplex::Outcome::Optimal => LpSolution {
            status: LpStatus::Optimal,
            values: sx.values(),
            objective: sx.objective(),
            iterations: sx.iterations,
        },
        simplex::Outcome::Infeasible => LpSolution {
            status: LpStatus::Infeasible,
            values: Vec::new(),
            objective: f64::INFINITY,
            iterations: sx.iterations,
        },
        simplex::Outcome::Unbounded => LpSolution {
            status: LpStatus::Unbounded,
            values: Vec::new(),
            objective: f64::NEG_INFINITY,
            iterations: sx.iterations,
        },
    }
}

#[cfg(test)]
mod tests;
