use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{check_instance, SolveError, SolveResult, Strategy};
use crate::model::{
    evaluate_schedule, predecessors_into, Indexed, Instance, Placement, Schedule, SetupMode,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinState {
    Open,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bin {
    pub machine: String,
    pub generation: usize,
    pub remaining: u32,
    pub contents: Vec<String>,
    pub state: BinState,
}

/// First-fit decreasing with machine copies. Bins are returned in
/// (generation, machine) order; every bin ends closed.
pub fn ffd_pack(instance: &Instance) -> Vec<Bin> {
    let mut order: Vec<usize> = (0..instance.jobs.len()).collect();
    order.sort_by(|&a, &b| {
        let (ja, jb) = (&instance.jobs[a], &instance.jobs[b]);
        jb.qubits.cmp(&ja.qubits).then_with(|| ja.id.cmp(&jb.id))
    });
    let generation = |g: usize| {
        instance.machines.iter().map(move |m| Bin {
            machine: m.id.clone(),
            generation: g,
            remaining: m.capacity,
            contents: Vec::new(),
            state: BinState::Open,
        })
    };
    let mut bins: Vec<Bin> = if instance.jobs.is_empty() {
        Vec::new()
    } else {
        generation(0).collect()
    };
    for j in order {
        let job = &instance.jobs[j];
        let fits = |b: &Bin| b.state == BinState::Open && b.remaining >= job.qubits;
        let slot = match bins.iter().position(fits) {
            Some(slot) => slot,
            None => {
                let next = bins.last().map_or(0, |b| b.generation + 1);
                let first = bins.len();
                bins.extend(generation(next));
                match bins[first..].iter().position(fits) {
                    Some(p) => first + p,
                    // Fits no machine; validation rejects this earlier.
                    None => continue,
                }
            }
        };
        let bin = &mut bins[slot];
        bin.remaining -= job.qubits;
        bin.contents.push(job.id.clone());
        if bin.remaining == 0 {
            bin.state = BinState::Closed;
        }
    }
    for bin in &mut bins {
        bin.state = BinState::Closed;
    }
    bins
}

/// Turns a packing into a schedule: the jobs of a generation start together
/// once the previous generation on the same machine has completed.
pub fn baseline_schedule(instance: &Instance, bins: &[Bin]) -> Result<Schedule, SolveError> {
    let ix: Indexed = instance.indexed()?;
    let n = ix.n;
    let mut machine = vec![usize::MAX; n];
    let mut start = vec![0.0; n];
    let mut completion = vec![0.0; n];
    let mut ready = vec![0.0f64; ix.m];
    let mut preds = Vec::new();
    let generations = bins.iter().map(|b| b.generation + 1).max().unwrap_or(0);
    for g in 0..generations {
        for bin in bins.iter().filter(|b| b.generation == g) {
            let k = instance
                .machine_position(&bin.machine)
                .ok_or_else(|| crate::model::ModelError::UnknownMachine(bin.machine.clone()))?;
            let members: Vec<usize> = bin
                .contents
                .iter()
                .map(|id| {
                    instance
                        .job_position(id)
                        .ok_or_else(|| crate::model::ModelError::UnknownJob(id.clone()))
                })
                .collect::<Result<_, _>>()?;
            for &j in &members {
                machine[j] = k;
                start[j] = ready[k];
                // Not yet complete; keeps members out of each other's predecessors.
                completion[j] = f64::INFINITY;
            }
            // Earlier generations are complete by now, so predecessors are final.
            let finish: Vec<f64> = members
                .iter()
                .map(|&j| {
                    predecessors_into(&machine, &start, &completion, j, &mut preds);
                    let setup = preds.iter().map(|&p| ix.setup(p, j, k)).fold(0.0, f64::max);
                    start[j] + ix.processing(j, k) + setup
                })
                .collect();
            for (&j, &c) in members.iter().zip(&finish) {
                completion[j] = c;
                ready[k] = ready[k].max(c);
            }
        }
    }
    let placements: Vec<Placement> = (0..n)
        .map(|j| Placement {
            job: instance.jobs[j].id.clone(),
            machine: instance.machines[machine[j]].id.clone(),
            start: start[j],
        })
        .collect();
    Ok(evaluate_schedule(&placements, instance, SetupMode::SequenceDependent)?)
}

pub fn solve_baseline(instance: &Instance) -> Result<SolveResult, SolveError> {
    check_instance(instance)?;
    let clock = Instant::now();
    let bins = ffd_pack(instance);
    let schedule = baseline_schedule(instance, &bins)?;
    Ok(SolveResult::plain(
        schedule,
        Strategy::Baseline,
        clock.elapsed().as_secs_f64(),
    ))
}
