//! Exhaustive reference solver for small instances.
//!
//! Machines do not interact (setups and capacity are per machine), so the
//! optimum is found per `(machine, job subset)` and then combined over all
//! job-to-machine assignments. Each subset is solved twice where possible:
//!
//! - **permutation**: every job order, each job placed at one of the lane's
//!   event times (last start or a later completion);
//! - **grid**: every non-decreasing sequence of integer starts in
//!   `0..=t_max`, for integral instances with a granularity of 1.
//!
//! The reported schedule is the better of the two; the check records both.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::lane::Lane;
use super::{check_instance, SolveError, SolveResult, Strategy};
use crate::model::{evaluate_schedule, Indexed, Instance, Placement, SetupMode, TimeMode, EPS};
use crate::par::{self, Execution};

pub const DEFAULT_ORACLE_LIMIT: usize = 5;
/// Largest instance for which the start-time grid is also enumerated.
pub const DEFAULT_GRID_LIMIT: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub permutation: Option<f64>,
    /// `None` when the grid was not enumerated.
    pub grid: Option<f64>,
}

impl OracleCheck {
    /// Whether both methods ran and found the same optimum.
    pub fn agrees(&self) -> bool {
        match (self.permutation, self.grid) {
            (Some(p), Some(g)) => (p - g).abs() <= 1e-6,
            (None, None) => true,
            _ => false,
        }
    }
}

type Best = Option<(f64, Vec<(usize, f64, f64)>)>;

struct Search<'a> {
    ix: &'a Indexed,
    k: usize,
    horizon: f64,
    grid_max: Option<u32>,
    best: f64,
    best_lane: Vec<(usize, f64, f64)>,
}

impl Search<'_> {
    fn run(&mut self, lane: &mut Lane, remaining: &mut Vec<usize>) {
        if remaining.is_empty() {
            let span = lane.makespan();
            if span < self.best - EPS {
                self.best = span;
                self.best_lane = lane.placed.clone();
            }
            return;
        }
        let times: Vec<f64> = match self.grid_max {
            None => lane.event_times(),
            Some(t_max) => (lane.last_start() as u32..=t_max).map(f64::from).collect(),
        };
        for pos in 0..remaining.len() {
            let j = remaining[pos];
            for &t in &times {
                // Canonical order for equal starts on the grid.
                if self.grid_max.is_some()
                    && (t - lane.last_start()).abs() <= EPS
                    && lane.placed.last().is_some_and(|p| p.0 > j)
                {
                    continue;
                }
                if t + self.ix.processing(j, self.k) >= self.best - EPS {
                    break;
                }
                if !lane.fits_at(self.ix, j, self.k, t) {
                    continue;
                }
                let c = lane.completion_at(self.ix, j, self.k, t);
                if c > self.horizon + EPS || c >= self.best - EPS {
                    continue;
                }
                remaining.swap_remove(pos);
                lane.placed.push((j, t, c));
                self.run(lane, remaining);
                lane.placed.pop();
                remaining.push(j);
                let last = remaining.len() - 1;
                remaining.swap(pos, last);
            }
        }
    }
}

fn solve_subset(ix: &Indexed, k: usize, jobs: &[usize], horizon: f64, grid_max: Option<u32>) -> Best {
    if jobs.iter().any(|&j| !ix.fits(j, k)) {
        return None;
    }
    if jobs.is_empty() {
        return Some((0.0, Vec::new()));
    }
    let mut search = Search {
        ix,
        k,
        horizon,
        grid_max,
        best: f64::INFINITY,
        best_lane: Vec::new(),
    };
    search.run(&mut Lane::default(), &mut jobs.to_vec());
    search.best.is_finite().then_some((search.best, search.best_lane))
}

fn members(mask: usize, n: usize) -> Vec<usize> {
    (0..n).filter(|j| mask >> j & 1 == 1).collect()
}

/// Best assignment given per-(machine, subset) optima; returns the makespan
/// and the lanes per machine.
fn combine(n: usize, m: usize, table: &[Best]) -> Option<(f64, Vec<usize>)> {
    let subsets = 1usize << n;
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut assign = vec![0usize; n];
    loop {
        let mut masks = vec![0usize; m];
        for (j, &k) in assign.iter().enumerate() {
            masks[k] |= 1 << j;
        }
        let mut span = 0.0f64;
        let mut ok = true;
        for k in 0..m {
            match &table[k * subsets + masks[k]] {
                Some((s, _)) => span = span.max(*s),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && best.as_ref().is_none_or(|b| span < b.0 - EPS) {
            best = Some((span, masks));
        }
        // Next assignment in lexicographic order.
        let mut pos = 0;
        loop {
            if pos == n {
                return best;
            }
            assign[pos] += 1;
            if assign[pos] < m {
                break;
            }
            assign[pos] = 0;
            pos += 1;
        }
    }
}

fn enumerate(
    ix: &Indexed,
    horizon: f64,
    grid_max: Option<u32>,
    exec: Execution,
) -> Option<(f64, Vec<(usize, usize, f64)>)> {
    let n = ix.n;
    let subsets = 1usize << n;
    let table: Vec<Best> = par::map_range(exec, ix.m * subsets, |cell| {
        let (k, mask) = (cell / subsets, cell % subsets);
        solve_subset(ix, k, &members(mask, n), horizon, grid_max)
    });
    let (span, masks) = combine(n, ix.m, &table)?;
    let mut placed = Vec::new();
    for (k, &mask) in masks.iter().enumerate() {
        if let Some((_, lane)) = &table[k * subsets + mask] {
            placed.extend(lane.iter().map(|&(j, b, _)| (j, k, b)));
        }
    }
    Some((span, placed))
}

fn grid_applies(instance: &Instance, ix: &Indexed) -> bool {
    if (instance.granularity - 1.0).abs() > EPS || ix.n > DEFAULT_GRID_LIMIT {
        return false;
    }
    if instance.time_mode == TimeMode::Integer {
        return true;
    }
    let integral = |v: f64| v.fract() == 0.0;
    (0..ix.n).all(|j| {
        (0..ix.m).all(|k| {
            integral(ix.processing(j, k)) && (0..=ix.n).all(|p| integral(ix.setup(p, j, k)))
        })
    })
}

/// Exhaustive optimum for instances with at most `limit` jobs, together with
/// the agreement check between the two enumeration methods.
pub fn solve_oracle(instance: &Instance, limit: usize) -> Result<(SolveResult, OracleCheck), SolveError> {
    solve_oracle_with(instance, limit, Execution::default())
}

pub fn solve_oracle_with(
    instance: &Instance,
    limit: usize,
    exec: Execution,
) -> Result<(SolveResult, OracleCheck), SolveError> {
    check_instance(instance)?;
    let ix = instance.indexed()?;
    if ix.n > limit {
        return Err(SolveError::TooLarge {
            jobs: ix.n,
            limit,
        });
    }
    let clock = Instant::now();
    let horizon = instance.horizon();
    let perm = enumerate(&ix, horizon, None, exec);
    let grid = grid_applies(instance, &ix)
        .then(|| enumerate(&ix, horizon, Some(instance.t_max), exec))
        .flatten();
    let check = OracleCheck {
        permutation: perm.as_ref().map(|p| p.0),
        grid: if grid_applies(instance, &ix) {
            grid.as_ref().map(|g| g.0)
        } else {
            None
        },
    };
    let best = match (perm, grid) {
        (Some(p), Some(g)) => Some(if g.0 < p.0 - EPS { g } else { p }),
        (p, g) => p.or(g),
    };
    let (_, placed) = best.ok_or(SolveError::NoFeasibleSchedule { horizon })?;
    let placements: Vec<Placement> = placed
        .iter()
        .map(|&(j, k, b)| Placement {
            job: instance.jobs[j].id.clone(),
            machine: instance.machines[k].id.clone(),
            start: b,
        })
        .collect();
    let schedule = evaluate_schedule(&placements, instance, SetupMode::SequenceDependent)?;
    Ok((
        SolveResult::plain(schedule, Strategy::Oracle, clock.elapsed().as_secs_f64()),
        check,
    ))
}
