//! Single-machine partial schedules built with non-decreasing starts.
//!
//! A job appended at `t >= last_start` never changes the predecessors of the
//! jobs already placed (it completes after all their starts), so placed
//! completions are final and only the new job's setup has to be computed.

use crate::model::{Indexed, EPS};

#[derive(Debug, Clone, Default)]
pub(crate) struct Lane {
    /// `(job, start, completion)` in placement order.
    pub placed: Vec<(usize, f64, f64)>,
}

impl Lane {
    pub fn last_start(&self) -> f64 {
        self.placed.last().map_or(0.0, |p| p.1)
    }

    pub fn makespan(&self) -> f64 {
        self.placed.iter().map(|p| p.2).fold(0.0, f64::max)
    }

    /// Qubits in use at `t`; usage never grows after the last start.
    pub fn usage_at(&self, ix: &Indexed, t: f64) -> u32 {
        self.placed
            .iter()
            .filter(|&&(_, b, c)| b <= t + EPS && t < c - EPS)
            .map(|&(j, _, _)| ix.qubits[j])
            .sum()
    }

    pub fn fits_at(&self, ix: &Indexed, j: usize, k: usize, t: f64) -> bool {
        self.usage_at(ix, t) + ix.qubits[j] <= ix.capacity[k]
    }

    /// Completion of `j` started at `t` on machine `k`.
    pub fn completion_at(&self, ix: &Indexed, j: usize, k: usize, t: f64) -> f64 {
        let latest = self
            .placed
            .iter()
            .filter(|p| p.2 <= t + EPS)
            .map(|p| p.2)
            .fold(f64::NEG_INFINITY, f64::max);
        let setup = if latest == f64::NEG_INFINITY {
            ix.setup(0, j, k)
        } else {
            self.placed
                .iter()
                .filter(|p| p.2 <= t + EPS && p.2 >= latest - EPS)
                .map(|p| ix.setup(p.0 + 1, j, k))
                .fold(0.0, f64::max)
        };
        t + ix.processing(j, k) + setup
    }

    /// The last start and every later completion, ascending.
    pub fn event_times(&self) -> Vec<f64> {
        let from = self.last_start();
        let mut times = vec![from];
        times.extend(self.placed.iter().map(|p| p.2).filter(|&c| c > from + EPS));
        times.sort_by(f64::total_cmp);
        times.dedup_by(|a, b| (*a - *b).abs() <= EPS);
        times
    }

    /// Earliest event time at which `j` fits.
    pub fn earliest_fit(&self, ix: &Indexed, j: usize, k: usize) -> f64 {
        self.event_times()
            .into_iter()
            .find(|&t| self.fits_at(ix, j, k, t))
            // After the last completion the machine is empty.
            .unwrap_or_else(|| self.makespan().max(self.last_start()))
    }
}
