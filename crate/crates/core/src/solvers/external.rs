//! MILP strategies through an external solver process.
//!
//! The solver is invoked through a shell command template with the
//! placeholders `{lp}`, `{solution}`, `{gap}`, `{time_limit}` and
//! `{start_args}` (empty, or `--start <file>` when a start is supplied).

use std::fmt::Write as _;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{check_instance, solve_baseline, solve_greedy, SolveError, SolveResult, Strategy};
use crate::milp::{
    build_extended, build_simple, check_assignment, encode_schedule, extract_schedule,
    parse_solution, serialize_lp, slot_instance, MilpModel, ModelMode, SolveStatus,
};
use crate::model::{evaluate_schedule, Instance, SetupMode};

pub const SOLVER_ENV: &str = "MILQ_SOLVER_CMD";
pub const DEFAULT_GAP: f64 = 0.2;
pub const DEFAULT_TIME_LIMIT: f64 = 60.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Command template; falls back to the `MILQ_SOLVER_CMD` environment variable.
    pub command: Option<String>,
    pub gap: f64,
    pub time_limit: f64,
    /// Hand the better of the baseline and greedy schedules to the solver as a
    /// start when it fits the model.
    pub warm_start: bool,
    pub oracle_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            command: None,
            gap: DEFAULT_GAP,
            time_limit: DEFAULT_TIME_LIMIT,
            warm_start: true,
            oracle_limit: super::DEFAULT_ORACLE_LIMIT,
        }
    }
}

fn quote(path: &Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', r"'\''"))
}

/// Template for the bundled HiGHS adapter script.
pub fn highs_command(script: &Path) -> String {
    format!(
        "python3 {} {{lp}} {{solution}} --gap {{gap}} --time-limit {{time_limit}} {{start_args}}",
        quote(script)
    )
}

/// The configured command template, if any.
pub fn resolve_command(options: &SolverOptions) -> Option<String> {
    options
        .command
        .clone()
        .or_else(|| std::env::var(SOLVER_ENV).ok())
        .filter(|c| !c.trim().is_empty())
}

fn start_values(model: &MilpModel, instance: &Instance) -> Option<Vec<f64>> {
    let mut slots = slot_instance(instance);
    if model.mode == ModelMode::Simple {
        // With every predecessor charged s_jm the baseline timing is the
        // job-only timing the simple model uses.
        let ix = slots.indexed().ok()?;
        let agg = ix.aggregated_setup();
        for (j, job) in instance.jobs.iter().enumerate() {
            for (k, machine) in instance.machines.iter().enumerate() {
                for pred in slots.timing.setup.values_mut() {
                    if let Some(cell) = pred.get_mut(&job.id).and_then(|row| row.get_mut(&machine.id)) {
                        *cell = agg[j * ix.m + k];
                    }
                }
            }
        }
    }
    [solve_baseline(&slots), solve_greedy(&slots)]
        .into_iter()
        .filter_map(|r| r.ok())
        .filter_map(|r| {
            let values = encode_schedule(model, &slots, &r.schedule).ok()?;
            check_assignment(model, &values)
                .is_empty()
                .then_some((r.schedule.makespan, values))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, values)| values)
}

/// Builds the model, runs the solver and extracts the schedule. The
/// returned schedule is re-evaluated under the instance's sequence-dependent
/// setups; `objective` keeps the MILP value.
pub fn solve_milp(
    instance: &Instance,
    mode: ModelMode,
    options: &SolverOptions,
) -> Result<SolveResult, SolveError> {
    let template = resolve_command(options).ok_or(SolveError::NoSolverConfigured)?;
    check_instance(instance)?;
    let clock = Instant::now();
    let model = match mode {
        ModelMode::Extended => build_extended(instance)?,
        ModelMode::Simple => build_simple(instance)?,
    };
    let dir = tempfile::tempdir()?;
    let lp_path = dir.path().join("model.lp");
    let sol_path = dir.path().join("model.sol");
    std::fs::write(&lp_path, serialize_lp(&model))?;
    let mut start_args = String::new();
    if options.warm_start {
        if let Some(values) = start_values(&model, instance) {
            let start_path = dir.path().join("start.txt");
            let mut text = String::new();
            for (var, v) in model.variables.iter().zip(&values) {
                if *v != 0.0 {
                    let _ = writeln!(text, "{} {}", var.name, v);
                }
            }
            std::fs::write(&start_path, text)?;
            start_args = format!("--start {}", quote(&start_path));
        }
    }
    let command = template
        .replace("{lp}", &quote(&lp_path))
        .replace("{solution}", &quote(&sol_path))
        .replace("{gap}", &options.gap.to_string())
        .replace("{time_limit}", &options.time_limit.to_string())
        .replace("{start_args}", &start_args);
    let output = Command::new("sh").arg("-c").arg(&command).output()?;
    if !output.status.success() {
        return Err(SolveError::SolverFailed(format!(
            "`{command}` exited with {}: {}",
            output.status,
            String::from_utf8_lossy(&output.stderr).trim()
        )));
    }
    let text = std::fs::read_to_string(&sol_path)
        .map_err(|e| SolveError::SolverFailed(format!("no solution file: {e}")))?;
    let solution =
        parse_solution(&text, &model).map_err(|e| SolveError::SolverFailed(e.to_string()))?;
    if solution.status == SolveStatus::Infeasible {
        return Err(SolveError::Infeasible {
            t_max: instance.t_max,
        });
    }
    if !solution.has_incumbent() {
        return Err(SolveError::SolverFailed(format!(
            "no incumbent within {} s",
            options.time_limit
        )));
    }
    let extracted = extract_schedule(&solution, &model, instance)
        .map_err(|e| SolveError::SolverFailed(e.to_string()))?;
    let schedule = evaluate_schedule(
        &extracted.placements(),
        instance,
        SetupMode::SequenceDependent,
    )?;
    Ok(SolveResult {
        schedule,
        strategy: match mode {
            ModelMode::Extended => Strategy::Extended,
            ModelMode::Simple => Strategy::Simple,
        },
        solver_status: Some(solution.status),
        objective: solution.objective.map(|o| o * instance.granularity),
        reported_gap: Some(solution.reported_gap),
        wall_time: clock.elapsed().as_secs_f64(),
    })
}
