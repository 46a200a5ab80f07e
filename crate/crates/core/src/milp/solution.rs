use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::MilpModel;
use crate::model::{validate_schedule, Instance, Schedule, ScheduleEntry, ScheduleViolation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    GapTerminated,
    Infeasible,
    Timeout,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::GapTerminated => "gap_terminated",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Timeout => "timeout",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SolveStatus {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "optimal" => Ok(SolveStatus::Optimal),
            "gap_terminated" => Ok(SolveStatus::GapTerminated),
            "infeasible" => Ok(SolveStatus::Infeasible),
            "timeout" => Ok(SolveStatus::Timeout),
            other => Err(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: SolveStatus,
    /// `None` when the solver found no incumbent.
    pub objective: Option<f64>,
    /// One value per model variable, in model order.
    pub values: Vec<f64>,
    pub reported_gap: f64,
}

impl MilpSolution {
    pub fn has_incumbent(&self) -> bool {
        self.objective.is_some() && self.status != SolveStatus::Infeasible
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("solution file is empty")]
    Empty,
    #[error("solution file has no `{0}` line")]
    MissingHeader(&'static str),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("solution names unknown variables: {}", .0.join(", "))]
    UnknownVariables(Vec<String>),
}

fn number(text: &str, line: usize) -> Result<f64, ParseError> {
    text.parse::<f64>().map_err(|_| ParseError::Format {
        line,
        message: format!("`{text}` is not a number"),
    })
}

/// Reads the adapter's solution format: `status`, `objective` and `gap`
/// header lines followed by one `name value` pair per line. Variables not
/// listed are zero.
pub fn parse_solution(text: &str, model: &MilpModel) -> Result<MilpSolution, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let positions: HashMap<&str, usize> = model
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.as_str(), i))
        .collect();
    let mut status = None;
    let mut objective = None;
    let mut gap = None;
    let mut values = vec![0.0; model.variables.len()];
    let mut unknown = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let mut parts = raw.split_whitespace();
        let (Some(key), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(ParseError::Format {
                line,
                message: "expected `name value`".into(),
            });
        };
        match key {
            "status" => {
                status = Some(value.parse::<SolveStatus>().map_err(|s| ParseError::Format {
                    line,
                    message: format!("unknown status `{s}`"),
                })?)
            }
            "objective" => {
                objective = Some(if value == "none" { None } else { Some(number(value, line)?) })
            }
            "gap" => gap = Some(if value == "none" { 0.0 } else { number(value, line)? }),
            name => match positions.get(name) {
                Some(&pos) => values[pos] = number(value, line)?,
                None => unknown.push(name.to_string()),
            },
        }
    }
    if !unknown.is_empty() {
        return Err(ParseError::UnknownVariables(unknown));
    }
    let status = status.ok_or(ParseError::MissingHeader("status"))?;
    let objective = objective.ok_or(ParseError::MissingHeader("objective"))?;
    let reported_gap = match status {
        SolveStatus::Optimal => 0.0,
        _ => gap.unwrap_or(0.0),
    };
    Ok(MilpSolution {
        status,
        objective,
        values,
        reported_gap,
    })
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtractError {
    #[error("solver returned no incumbent (status {0})")]
    NoIncumbent(SolveStatus),
    #[error("job {0} is not assigned to exactly one machine")]
    AmbiguousMachine(String),
    #[error("solution has {got} values, model has {expected} variables")]
    WrongLength { got: usize, expected: usize },
    #[error("extracted schedule breaks {family}: {}", .violations.join("; "))]
    Infeasible {
        family: &'static str,
        violations: Vec<String>,
    },
}

fn family_of(v: &ScheduleViolation) -> &'static str {
    match v {
        ScheduleViolation::CapacityExceeded { .. } | ScheduleViolation::DoesNotFit { .. } => "C11",
        ScheduleViolation::OutsideHorizon(_) => "C9/C10",
        ScheduleViolation::EmptyInterval(_) => "C7",
        ScheduleViolation::MakespanMismatch { .. } => "C1",
        _ => "C3",
    }
}

/// Reads machines from `x` and start and completion from `b` and `c`,
/// scaled back by the granularity.
pub fn extract_schedule(
    solution: &MilpSolution,
    model: &MilpModel,
    instance: &Instance,
) -> Result<Schedule, ExtractError> {
    if !solution.has_incumbent() {
        return Err(ExtractError::NoIncumbent(solution.status));
    }
    if solution.values.len() != model.variables.len() {
        return Err(ExtractError::WrongLength {
            got: solution.values.len(),
            expected: model.variables.len(),
        });
    }
    let ix = &model.index;
    let g = instance.granularity;
    let v = &solution.values;
    let mut entries = Vec::with_capacity(ix.n);
    for (j, job) in instance.jobs.iter().enumerate() {
        let chosen: Vec<usize> = (0..ix.m).filter(|&k| v[ix.x(j, k)] > 0.5).collect();
        let [k] = chosen[..] else {
            return Err(ExtractError::AmbiguousMachine(job.id.clone()));
        };
        let start = v[ix.b(j)].round();
        let completion = v[ix.c(j)].round();
        entries.push(ScheduleEntry {
            job: job.id.clone(),
            machine: instance.machines[k].id.clone(),
            start: start * g,
            completion: completion * g,
        });
    }
    let schedule = Schedule::from_entries(entries);
    let violations = validate_schedule(&schedule, instance);
    if let Some(first) = violations.first() {
        return Err(ExtractError::Infeasible {
            family: family_of(first),
            violations: violations.iter().map(|v| v.to_string()).collect(),
        });
    }
    Ok(schedule)
}
