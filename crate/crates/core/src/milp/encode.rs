use thiserror::Error;

use super::{slot_instance, MilpModel, ModelMode};
use crate::model::{predecessors_into, Instance, ModelError, Schedule, EPS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodeError {
    #[error("time {value} of job {job} is not a whole number of slots")]
    OffGrid { job: String, value: f64 },
    #[error("job {0} starts outside the slot horizon")]
    OutsideHorizon(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn slot(value: f64, granularity: f64, job: &str) -> Result<f64, EncodeError> {
    let s = value / granularity;
    if (s - s.round()).abs() > 1e-6 {
        return Err(EncodeError::OffGrid {
            job: job.to_string(),
            value,
        });
    }
    Ok(s.round())
}

/// Variable values that describe `schedule` in `model`. Used to hand a known
/// schedule to the solver as a start and to check that no feasible schedule
/// is cut off. Start and completion times must lie on the slot grid.
pub fn encode_schedule(
    model: &MilpModel,
    instance: &Instance,
    schedule: &Schedule,
) -> Result<Vec<f64>, EncodeError> {
    let ix = &model.index;
    let n = ix.n;
    let g = instance.granularity;
    let mut values = vec![0.0; model.variables.len()];
    let mut machine = vec![usize::MAX; n];
    let mut start = vec![0.0; n];
    let mut completion = vec![0.0; n];
    for e in &schedule.entries {
        let j = instance
            .job_position(&e.job)
            .ok_or_else(|| ModelError::UnknownJob(e.job.clone()))?;
        let k = instance
            .machine_position(&e.machine)
            .ok_or_else(|| ModelError::UnknownMachine(e.machine.clone()))?;
        machine[j] = k;
        start[j] = slot(e.start, g, &e.job)?;
        completion[j] = slot(e.completion, g, &e.job)?;
    }
    if let Some(j) = machine.iter().position(|&k| k == usize::MAX) {
        return Err(ModelError::MissingJob(instance.jobs[j].id.clone()).into());
    }
    for j in 0..n {
        let k = machine[j];
        values[ix.x(j, k)] = 1.0;
        values[ix.b(j)] = start[j];
        values[ix.c(j)] = completion[j];
        for t in start[j] as usize..completion[j] as usize {
            if t >= ix.slots {
                return Err(EncodeError::OutsideHorizon(instance.jobs[j].id.clone()));
            }
            values[ix.z(j, k, t)] = 1.0;
        }
    }
    values[ix.c_max] = completion.iter().copied().fold(0.0, f64::max);
    if model.mode == ModelMode::Simple {
        return Ok(values);
    }

    let slots = slot_instance(instance).indexed()?;
    let mut preds = Vec::new();
    for j in 0..n {
        let k = machine[j];
        predecessors_into(&machine, &start, &completion, j, &mut preds);
        let mut best: Option<(usize, f64)> = None;
        for &p in &preds {
            values[ix.y(p, j, k).unwrap()] = 1.0;
            let s = slots.setup(p, j, k);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((p, s));
            }
        }
        let (p, _) = best.expect("every job has a predecessor");
        values[ix.w(p, j, k).unwrap()] = 1.0;
        values[ix.sigma(j).unwrap()] = completion[j] - start[j] - slots.processing(j, k);
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let alpha = completion[i] <= start[j] + EPS;
            let beta = completion[i] < completion[j] - EPS;
            values[ix.alpha(i, j).unwrap()] = alpha as u8 as f64;
            values[ix.beta(i, j).unwrap()] = beta as u8 as f64;
            if machine[i] == machine[j] {
                values[ix.gamma(i, j, machine[i]).unwrap()] = 1.0;
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for kk in 0..n {
                if i == j || kk == i || kk == j {
                    continue;
                }
                let blocks = completion[i] < completion[kk] - EPS && completion[kk] <= start[j] + EPS;
                if blocks {
                    values[ix.delta(i, j, kk, machine[kk]).unwrap()] = 1.0;
                }
            }
        }
    }
    Ok(values)
}

/// Names of the constraints (and bounds) that `values` violates.
pub fn check_assignment(model: &MilpModel, values: &[f64]) -> Vec<String> {
    const TOL: f64 = 1e-6;
    let mut out = Vec::new();
    for (v, var) in model.variables.iter().enumerate() {
        let x = values[v];
        let upper = var.upper.or(if var.family.is_binary() { Some(1.0) } else { None });
        if x < -TOL || upper.is_some_and(|u| x > u + TOL) {
            out.push(format!("bound {}", var.name));
        } else if var.family.is_binary() && (x - x.round()).abs() > TOL {
            out.push(format!("integrality {}", var.name));
        }
    }
    for c in &model.constraints {
        if !c.is_satisfied(values, TOL) {
            out.push(c.name.clone());
        }
    }
    out
}
