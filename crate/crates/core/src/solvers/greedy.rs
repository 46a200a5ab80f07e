use std::time::Instant;

use super::lane::Lane;
use super::{check_instance, SolveError, SolveResult, Strategy};
use crate::model::{evaluate_schedule, Instance, Placement, SetupMode};

/// Longest-processing-time-first list scheduling. Each job goes to the
/// machine where it completes earliest, at the first event time with enough
/// free qubits.
pub fn solve_greedy(instance: &Instance) -> Result<SolveResult, SolveError> {
    check_instance(instance)?;
    let clock = Instant::now();
    let ix = instance.indexed()?;
    let ix = &ix;
    let fitting = |j: usize| (0..ix.m).filter(move |&k| ix.fits(j, k));
    let weights: Vec<f64> = (0..ix.n)
        .map(|j| {
            let (sum, count) = fitting(j).fold((0.0, 0usize), |(s, c), k| (s + ix.processing(j, k), c + 1));
            sum / count.max(1) as f64
        })
        .collect();
    let mut order: Vec<usize> = (0..ix.n).collect();
    order.sort_by(|&a, &b| {
        weights[b]
            .total_cmp(&weights[a])
            .then_with(|| instance.jobs[a].id.cmp(&instance.jobs[b].id))
    });
    let mut lanes = vec![Lane::default(); ix.m];
    let mut placements = Vec::with_capacity(ix.n);
    for j in order {
        let best = fitting(j)
            .map(|k| {
                let t = lanes[k].earliest_fit(ix, j, k);
                (k, t, lanes[k].completion_at(ix, j, k, t))
            })
            .min_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)));
        let Some((k, t, c)) = best else { continue };
        lanes[k].placed.push((j, t, c));
        placements.push(Placement {
            job: instance.jobs[j].id.clone(),
            machine: instance.machines[k].id.clone(),
            start: t,
        });
    }
    let schedule = evaluate_schedule(&placements, instance, SetupMode::SequenceDependent)?;
    Ok(SolveResult::plain(
        schedule,
        Strategy::Greedy,
        clock.elapsed().as_secs_f64(),
    ))
}
