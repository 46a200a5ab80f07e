//! Time-indexed MILP for scheduling on unrelated parallel machines with a
//! qubit resource and sequence-dependent setups.
//!
//! Two variants are built from the same instance:
//!
//! - **extended**: sequence-dependent setups through the successor variables
//!   `y`, with helper indicators `alpha` (i completes by the start of j),
//!   `beta` (i completes before j), `gamma` (i and j share a machine) and
//!   `delta` (k completes between i and the start of j). The setup of a job
//!   is the maximum over its realised predecessors, held in `sigma` and
//!   selected through `w`.
//! - **simple**: job-only setups `s_jm = max_i s_ijm`; no successor
//!   variables.
//!
//! All times in the model are slot counts: instance times are divided by the
//! granularity and rounded up. Slot `t` covers `[t, t + 1)`, so a job with
//! start `b` and completion `c` occupies the slots `b..c`.

mod build;
mod encode;
mod lp;
mod solution;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use build::{build_extended, build_simple, slot_instance};
pub use encode::{check_assignment, encode_schedule, EncodeError};
pub use lp::serialize_lp;
pub use solution::{extract_schedule, parse_solution, ExtractError, MilpSolution, ParseError, SolveStatus};

use crate::model::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelMode {
    Extended,
    Simple,
}

impl fmt::Display for ModelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelMode::Extended => "extended",
            ModelMode::Simple => "simple",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarFamily {
    X,
    Y,
    Z,
    Alpha,
    Beta,
    Gamma,
    Delta,
    Completion,
    Start,
    Makespan,
    DummyCompletion,
    Setup,
    SetupSelect,
}

impl VarFamily {
    pub fn is_binary(self) -> bool {
        !matches!(
            self,
            VarFamily::Completion
                | VarFamily::Start
                | VarFamily::Makespan
                | VarFamily::DummyCompletion
                | VarFamily::Setup
        )
    }
}

/// Constraint families. `C1`..`C20` carry their usual labels; the remaining
/// variants tighten a family so the model encodes the evaluator exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    C1,
    C2,
    C3,
    C4,
    C5,
    /// `sigma_j >= s_ijm · y_ijm`
    C5Setup,
    /// `sigma_j <= s_ijm · y_ijm + M (1 - w_ijm)`
    C5Select,
    /// `Σ_i,m w_ijm = 1`
    C5One,
    C6,
    C7,
    C8,
    C9,
    C10,
    C11,
    C12,
    C13,
    C14,
    C15,
    /// No dummy predecessor once a job on the machine has completed.
    C15Dummy,
    C16,
    C16Upper,
    C17,
    C17Upper,
    C18,
    C19,
    C19Upper,
    C20,
    /// No successor fact across a job that completed in between.
    C20Forbid,
    /// Area bound per machine: `Σ_j q_j Σ_t z_jmt <= Q_m c_max`.
    K1,
    /// Jobs wider than half a machine never overlap on it.
    K2,
}

impl Family {
    pub fn label(self) -> &'static str {
        use Family::*;
        match self {
            C1 => "C1",
            C2 => "C2",
            C3 => "C3",
            C4 => "C4",
            C5 => "C5",
            C5Setup => "C5s",
            C5Select => "C5w",
            C5One => "C5u",
            C6 => "C6",
            C7 => "C7",
            C8 => "C8",
            C9 => "C9",
            C10 => "C10",
            C11 => "C11",
            C12 => "C12",
            C13 => "C13",
            C14 => "C14",
            C15 => "C15",
            C15Dummy => "C15d",
            C16 => "C16",
            C16Upper => "C16u",
            C17 => "C17",
            C17Upper => "C17u",
            C18 => "C18",
            C19 => "C19",
            C19Upper => "C19u",
            C20 => "C20",
            C20Forbid => "C20f",
            K1 => "K1",
            K2 => "K2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub family: VarFamily,
    /// Upper bound overriding the family default (`1` for binaries, none otherwise).
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub family: Family,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn lhs(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v]).sum()
    }

    pub fn is_satisfied(&self, values: &[f64], tol: f64) -> bool {
        let lhs = self.lhs(values);
        match self.sense {
            Sense::Le => lhs <= self.rhs + tol,
            Sense::Ge => lhs >= self.rhs - tol,
            Sense::Eq => (lhs - self.rhs).abs() <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelStats {
    pub num_variables: usize,
    pub num_constraints: usize,
    pub variables_by_family: BTreeMap<String, usize>,
    pub constraints_by_family: BTreeMap<String, usize>,
}

/// Positions of every variable family in [`MilpModel::variables`].
#[derive(Debug, Clone, Default)]
pub struct VarIndex {
    pub(crate) n: usize,
    pub(crate) m: usize,
    pub(crate) slots: usize,
    pub(crate) x: Vec<usize>,
    pub(crate) y: Vec<Option<usize>>,
    pub(crate) z: Vec<usize>,
    pub(crate) alpha: Vec<Option<usize>>,
    pub(crate) beta: Vec<Option<usize>>,
    pub(crate) gamma: Vec<Option<usize>>,
    pub(crate) delta: Vec<Option<usize>>,
    pub(crate) c: Vec<usize>,
    pub(crate) b: Vec<usize>,
    pub(crate) c_max: usize,
    pub(crate) c0: Option<usize>,
    pub(crate) sigma: Vec<Option<usize>>,
    pub(crate) w: Vec<Option<usize>>,
}

impl VarIndex {
    pub fn x(&self, j: usize, m: usize) -> usize {
        self.x[j * self.m + m]
    }
    /// `pred` is 0 for the dummy job, `i + 1` for job `i`.
    pub fn y(&self, pred: usize, j: usize, m: usize) -> Option<usize> {
        self.y.get((pred * self.n + j) * self.m + m).copied().flatten()
    }
    pub fn z(&self, j: usize, m: usize, t: usize) -> usize {
        self.z[(j * self.m + m) * self.slots + t]
    }
    pub fn alpha(&self, i: usize, j: usize) -> Option<usize> {
        self.alpha.get(i * self.n + j).copied().flatten()
    }
    pub fn beta(&self, i: usize, j: usize) -> Option<usize> {
        self.beta.get(i * self.n + j).copied().flatten()
    }
    pub fn gamma(&self, i: usize, j: usize, m: usize) -> Option<usize> {
        self.gamma.get((i * self.n + j) * self.m + m).copied().flatten()
    }
    pub fn delta(&self, i: usize, j: usize, k: usize, m: usize) -> Option<usize> {
        self.delta
            .get(((i * self.n + j) * self.n + k) * self.m + m)
            .copied()
            .flatten()
    }
    pub fn c(&self, j: usize) -> usize {
        self.c[j]
    }
    pub fn b(&self, j: usize) -> usize {
        self.b[j]
    }
    pub fn c_max(&self) -> usize {
        self.c_max
    }
    pub fn sigma(&self, j: usize) -> Option<usize> {
        self.sigma.get(j).copied().flatten()
    }
    /// `pred` is 0 for the dummy job, `i + 1` for job `i`.
    pub fn w(&self, pred: usize, j: usize, m: usize) -> Option<usize> {
        self.w.get((pred * self.n + j) * self.m + m).copied().flatten()
    }
}

#[derive(Debug, Clone)]
pub struct MilpModel {
    pub mode: ModelMode,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Minimised; always the single variable `c_max`.
    pub objective: Vec<(usize, f64)>,
    pub stats: ModelStats,
    pub index: VarIndex,
}

impl MilpModel {
    pub fn variable_position(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("invalid instance: {}", .0.join("; "))]
    InvalidInstance(Vec<String>),
    #[error("t_max {t_max} is below the lower bound {bound} slots; raise t_max")]
    TMaxTooSmall { t_max: u32, bound: u64 },
    #[error("sanitised variable name `{0}` is not unique; rename jobs or machines")]
    NameCollision(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
