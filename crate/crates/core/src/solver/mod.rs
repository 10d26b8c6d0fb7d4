//! Solver backends.
//!
//! Two ways of getting a [`MilpModel`] solved: HiGHS linked into the process,
//! or any executable that accepts HiGHS-style command-line flags and writes a
//! HiGHS raw solution file. Both return row duals with the convention
//! `dual = ∂objective/∂rhs`, so a binding `≥` row of a minimization has a
//! non-negative dual.

mod linked;
mod subprocess;

use std::path::PathBuf;

use thiserror::Error;

use crate::formulation::MilpModel;

pub use linked::solve_linked;
pub use subprocess::{parse_solution, solve_subprocess, SolutionFile};

/// Environment variable consulted for the subprocess solver command.
pub const SOLVER_ENV: &str = "RESERVE_MARKET_SOLVER";

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver I/O failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver backend failed: {0}")]
    Backend(String),
    #[error("malformed solution file: {0}")]
    Solution(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub mip_rel_gap: f64,
    /// Seconds.
    pub time_limit: f64,
    pub presolve: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mip_rel_gap: 1e-4,
            time_limit: 600.0,
            presolve: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Stopped on the time limit; an incumbent may or may not exist.
    TimeLimit,
    Infeasible,
    Unbounded,
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawSolution {
    pub status: SolveStatus,
    /// Present when a primal point is available.
    pub columns: Option<Vec<f64>>,
    pub objective: f64,
    /// Present when the backend reports a valid dual solution.
    pub row_duals: Option<Vec<f64>>,
    pub mip_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    Linked,
    Subprocess(PathBuf),
}

impl Backend {
    /// Subprocess backend using [`SOLVER_ENV`] if it is set.
    pub fn subprocess_from_env() -> Option<Backend> {
        std::env::var_os(SOLVER_ENV).map(|p| Backend::Subprocess(PathBuf::from(p)))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Backend::Linked => "linked",
            Backend::Subprocess(_) => "subprocess",
        }
    }

    pub fn solve(
        &self,
        model: &MilpModel,
        opts: &SolveOptions,
    ) -> Result<RawSolution, SolverError> {
        match self {
            Backend::Linked => Ok(solve_linked(model, opts)),
            Backend::Subprocess(cmd) => solve_subprocess(cmd, model, opts),
        }
    }
}
