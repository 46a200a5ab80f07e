//! Scheduling strategies: the first-fit-decreasing baseline, the simple and
//! extended MILP through an external solver, an exhaustive oracle for small
//! instances and a greedy list scheduler.

mod baseline;
mod external;
mod greedy;
mod lane;
mod oracle;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use baseline::{baseline_schedule, ffd_pack, solve_baseline, Bin, BinState};
pub use external::{
    highs_command, resolve_command, solve_milp, SolverOptions, DEFAULT_GAP, DEFAULT_TIME_LIMIT,
    SOLVER_ENV,
};
pub use greedy::solve_greedy;
pub use oracle::{solve_oracle, solve_oracle_with, OracleCheck, DEFAULT_GRID_LIMIT, DEFAULT_ORACLE_LIMIT};

use crate::milp::{BuildError, SolveStatus};
use crate::model::{ModelError, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Baseline,
    Simple,
    Extended,
    Oracle,
    Greedy,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Baseline,
        Strategy::Simple,
        Strategy::Extended,
        Strategy::Oracle,
        Strategy::Greedy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Baseline => "baseline",
            Strategy::Simple => "simple",
            Strategy::Extended => "extended",
            Strategy::Oracle => "oracle",
            Strategy::Greedy => "greedy",
        }
    }

    pub fn needs_solver(self) -> bool {
        matches!(self, Strategy::Simple | Strategy::Extended)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown strategy `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub schedule: Schedule,
    pub strategy: Strategy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver_status: Option<SolveStatus>,
    /// MILP objective in time units; `None` for the other strategies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reported_gap: Option<f64>,
    pub wall_time: f64,
}

impl SolveResult {
    pub(crate) fn plain(schedule: Schedule, strategy: Strategy, wall_time: f64) -> Self {
        Self {
            schedule,
            strategy,
            solver_status: None,
            objective: None,
            reported_gap: None,
            wall_time,
        }
    }

    pub fn makespan(&self) -> f64 {
        self.schedule.makespan
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("no solver configured; pass a solver command or set {}", SOLVER_ENV)]
    NoSolverConfigured,
    #[error("instance has {jobs} jobs, above the oracle limit of {limit}")]
    TooLarge { jobs: usize, limit: usize },
    #[error("invalid instance: {}", .0.join("; "))]
    InvalidInstance(Vec<String>),
    #[error("model is infeasible; raise t_max (currently {t_max})")]
    Infeasible { t_max: u32 },
    #[error("no schedule completes within the horizon of {horizon}; raise t_max")]
    NoFeasibleSchedule { horizon: f64 },
    #[error("solver failed: {0}")]
    SolverFailed(String),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SolveError {
    /// Input problems, as opposed to solver trouble.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            SolveError::TooLarge { .. }
                | SolveError::InvalidInstance(_)
                | SolveError::Build(_)
                | SolveError::Model(_)
        )
    }
}

pub(crate) fn check_instance(instance: &crate::model::Instance) -> Result<(), SolveError> {
    use crate::model::{validate_instance, InstanceViolation};
    let violations: Vec<String> = validate_instance(instance)
        .into_iter()
        // The heuristics do not depend on the MILP sizing parameters.
        .filter(|v| {
            !matches!(
                v,
                InstanceViolation::BigMTooSmall { .. } | InstanceViolation::TMaxBelowBound { .. }
            )
        })
        .map(|v| v.to_string())
        .collect();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(SolveError::InvalidInstance(violations))
    }
}

/// Runs one strategy.
pub fn solve(
    instance: &crate::model::Instance,
    strategy: Strategy,
    options: &SolverOptions,
) -> Result<SolveResult, SolveError> {
    match strategy {
        Strategy::Baseline => solve_baseline(instance),
        Strategy::Greedy => solve_greedy(instance),
        Strategy::Oracle => solve_oracle(instance, options.oracle_limit).map(|(r, _)| r),
        Strategy::Simple => solve_milp(instance, crate::milp::ModelMode::Simple, options),
        Strategy::Extended => solve_milp(instance, crate::milp::ModelMode::Extended, options),
    }
}
