//! Jobs, machines, timing tables and schedules, plus the schedule evaluator.
//!
//! Times are plain `f64` values. Occupation of a job is the half-open
//! interval `[start, completion)`, so capacity checks are exact for
//! real-valued times as well as integer ones.
//!
//! A job `j` on machine `m` with start `b_j` has as predecessors the jobs on
//! `m` whose completion is the latest completion not after `b_j`. When no job
//! on `m` has completed by `b_j`, the dummy job `0` (completion 0) is the
//! predecessor. Several predecessors are possible when completions tie; their
//! setups combine by taking the maximum.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of the dummy predecessor in timing tables and successor maps.
pub const DUMMY: &str = "0";

/// Tolerance for time comparisons.
pub(crate) const EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown job `{0}`")]
    UnknownJob(String),
    #[error("unknown machine `{0}`")]
    UnknownMachine(String),
    #[error("job `{0}` has more than one placement")]
    DuplicateJob(String),
    #[error("job `{0}` has no placement")]
    MissingJob(String),
    #[error("processing time missing for ({job}, {machine})")]
    MissingProcessing { job: String, machine: String },
    #[error("setup time missing for ({pred}, {job}, {machine})")]
    MissingSetup {
        pred: String,
        job: String,
        machine: String,
    },
    #[error("evaluation did not reach a fixed point after {0} iterations")]
    NonConvergence(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, Hash)]
#[serde(rename_all = "lowercase")]
pub enum TimeMode {
    Integer,
    #[default]
    Real,
}

/// Back-reference from a cut fragment to the circuit it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobOrigin {
    pub parent: String,
    pub fragment: usize,
    pub variant: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitJob {
    pub id: String,
    pub qubits: u32,
    pub depth: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<JobOrigin>,
}

impl CircuitJob {
    pub fn new(id: impl Into<String>, qubits: u32, depth: u32) -> Self {
        Self {
            id: id.into(),
            qubits,
            depth,
            origin: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Machine {
    pub id: String,
    pub capacity: u32,
}

impl Machine {
    pub fn new(id: impl Into<String>, capacity: u32) -> Self {
        Self {
            id: id.into(),
            capacity,
        }
    }
}

/// Processing times `p[job][machine]` and setup times
/// `setup[pred][job][machine]`, where `pred` is a job id or [`DUMMY`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TimingTables {
    pub processing: BTreeMap<String, BTreeMap<String, f64>>,
    pub setup: BTreeMap<String, BTreeMap<String, BTreeMap<String, f64>>>,
}

impl TimingTables {
    pub fn processing_time(&self, job: &str, machine: &str) -> Option<f64> {
        self.processing.get(job)?.get(machine).copied()
    }

    pub fn setup_time(&self, pred: &str, job: &str, machine: &str) -> Option<f64> {
        self.setup.get(pred)?.get(job)?.get(machine).copied()
    }

    pub fn set_processing(&mut self, job: &str, machine: &str, value: f64) {
        self.processing
            .entry(job.to_string())
            .or_default()
            .insert(machine.to_string(), value);
    }

    pub fn set_setup(&mut self, pred: &str, job: &str, machine: &str, value: f64) {
        self.setup
            .entry(pred.to_string())
            .or_default()
            .entry(job.to_string())
            .or_default()
            .insert(machine.to_string(), value);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub jobs: Vec<CircuitJob>,
    pub machines: Vec<Machine>,
    pub timing: TimingTables,
    pub big_m: f64,
    pub t_max: u32,
    pub granularity: f64,
    #[serde(default)]
    pub time_mode: TimeMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub job: String,
    pub machine: String,
    pub start: f64,
    pub completion: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Schedule {
    pub entries: Vec<ScheduleEntry>,
    pub makespan: f64,
}

impl Schedule {
    pub fn from_entries(entries: Vec<ScheduleEntry>) -> Self {
        let makespan = entries.iter().map(|e| e.completion).fold(0.0, f64::max);
        Self { entries, makespan }
    }

    pub fn entry(&self, job: &str) -> Option<&ScheduleEntry> {
        self.entries.iter().find(|e| e.job == job)
    }

    /// Machine and start of every entry, the input of [`evaluate_schedule`].
    pub fn placements(&self) -> Vec<Placement> {
        self.entries
            .iter()
            .map(|e| Placement {
                job: e.job.clone(),
                machine: e.machine.clone(),
                start: e.start,
            })
            .collect()
    }
}

/// A job assigned to a machine with a fixed start time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub job: String,
    pub machine: String,
    pub start: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pred {
    Dummy,
    Job(String),
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pred::Dummy => f.write_str(DUMMY),
            Pred::Job(id) => f.write_str(id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Succession {
    pub pred: Pred,
    pub job: String,
    pub machine: String,
}

/// The realised successor facts `(i, j, m)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SuccessorMap {
    pub relation: BTreeSet<Succession>,
}

impl SuccessorMap {
    pub fn predecessors_of(&self, job: &str) -> Vec<&Pred> {
        self.relation
            .iter()
            .filter(|s| s.job == job)
            .map(|s| &s.pred)
            .collect()
    }

    pub fn contains(&self, pred: Pred, job: &str, machine: &str) -> bool {
        self.relation.contains(&Succession {
            pred,
            job: job.to_string(),
            machine: machine.to_string(),
        })
    }
}

/// How setup times enter a job's duration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetupMode {
    /// Maximum of `s_ijm` over the realised predecessors `i`.
    SequenceDependent,
    /// Job-only setup `s_jm = max_i s_ijm`.
    JobOnly,
}

// ---------------------------------------------------------------------------
// Indexed view
// ---------------------------------------------------------------------------

/// Dense, index-based copy of an instance's tables. Predecessor indices use
/// `0` for the dummy job and `j + 1` for job `j`.
#[derive(Debug, Clone)]
pub struct Indexed {
    pub n: usize,
    pub m: usize,
    pub qubits: Vec<u32>,
    pub capacity: Vec<u32>,
    processing: Vec<f64>,
    setup: Vec<f64>,
}

impl Indexed {
    pub fn from_parts(
        qubits: Vec<u32>,
        capacity: Vec<u32>,
        processing: Vec<f64>,
        setup: Vec<f64>,
    ) -> Self {
        let n = qubits.len();
        let m = capacity.len();
        assert_eq!(processing.len(), n * m);
        assert_eq!(setup.len(), (n + 1) * n * m);
        Self {
            n,
            m,
            qubits,
            capacity,
            processing,
            setup,
        }
    }

    #[inline]
    pub fn processing(&self, job: usize, machine: usize) -> f64 {
        self.processing[job * self.m + machine]
    }

    #[inline]
    pub fn setup(&self, pred: usize, job: usize, machine: usize) -> f64 {
        self.setup[(pred * self.n + job) * self.m + machine]
    }

    #[inline]
    pub fn fits(&self, job: usize, machine: usize) -> bool {
        self.qubits[job] <= self.capacity[machine]
    }

    /// Job-only setup `s_jm = max over i in J∪{0}, i != j of s_ijm`.
    pub fn aggregated_setup(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n * self.m];
        for j in 0..self.n {
            for k in 0..self.m {
                out[j * self.m + k] = (0..=self.n)
                    .filter(|&i| i != j + 1)
                    .map(|i| self.setup(i, j, k))
                    .fold(f64::NEG_INFINITY, f64::max);
            }
        }
        out
    }

    pub(crate) fn max_setup(&self) -> f64 {
        self.setup.iter().copied().fold(0.0, f64::max)
    }
}

impl Instance {
    pub fn job_position(&self, id: &str) -> Option<usize> {
        self.jobs.iter().position(|j| j.id == id)
    }

    pub fn machine_position(&self, id: &str) -> Option<usize> {
        self.machines.iter().position(|m| m.id == id)
    }

    /// Dense tables; fails on the first missing entry.
    pub fn indexed(&self) -> Result<Indexed, ModelError> {
        let n = self.jobs.len();
        let m = self.machines.len();
        let mut processing = Vec::with_capacity(n * m);
        for job in &self.jobs {
            for machine in &self.machines {
                processing.push(
                    self.timing
                        .processing_time(&job.id, &machine.id)
                        .ok_or_else(|| ModelError::MissingProcessing {
                            job: job.id.clone(),
                            machine: machine.id.clone(),
                        })?,
                );
            }
        }
        let mut setup = Vec::with_capacity((n + 1) * n * m);
        let preds = std::iter::once(DUMMY).chain(self.jobs.iter().map(|j| j.id.as_str()));
        for (pi, pred) in preds.enumerate() {
            for (ji, job) in self.jobs.iter().enumerate() {
                for machine in &self.machines {
                    let value = if pi == ji + 1 {
                        // s_jjm is never read; tolerate its absence.
                        self.timing
                            .setup_time(pred, &job.id, &machine.id)
                            .unwrap_or(0.0)
                    } else {
                        self.timing
                            .setup_time(pred, &job.id, &machine.id)
                            .ok_or_else(|| ModelError::MissingSetup {
                                pred: pred.to_string(),
                                job: job.id.clone(),
                                machine: machine.id.clone(),
                            })?
                    };
                    setup.push(value);
                }
            }
        }
        Ok(Indexed {
            n,
            m,
            qubits: self.jobs.iter().map(|j| j.qubits).collect(),
            capacity: self.machines.iter().map(|m| m.capacity).collect(),
            processing,
            setup,
        })
    }

    /// Upper end of the time window covered by the slots `0..=t_max`.
    pub fn horizon(&self) -> f64 {
        (self.t_max as f64 + 1.0) * self.granularity
    }

    /// `ceil(Σ_j min_m (p_jm + min_i s_ijm) / (granularity · |M|))`.
    pub fn t_max_lower_bound(&self) -> Result<u64, ModelError> {
        let ix = self.indexed()?;
        if ix.m == 0 {
            return Ok(0);
        }
        let total: f64 = (0..ix.n)
            .map(|j| {
                (0..ix.m)
                    .map(|k| {
                        let s = (0..=ix.n)
                            .filter(|&i| i != j + 1)
                            .map(|i| ix.setup(i, j, k))
                            .fold(f64::INFINITY, f64::min);
                        ix.processing(j, k) + s
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        Ok((total / (self.granularity * ix.m as f64) - EPS).ceil().max(0.0) as u64)
    }
}

// ---------------------------------------------------------------------------
// Instance validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceViolation {
    ZeroQubits(String),
    ZeroDepth(String),
    ZeroCapacity(String),
    DuplicateJobId(String),
    DuplicateMachineId(String),
    ReservedJobId(String),
    FitsNoMachine(String),
    ProcessingIncomplete { job: String, machine: String },
    SetupIncomplete { pred: String, job: String, machine: String },
    NegativeTime(String),
    NonIntegerTime(String),
    BigMTooSmall { big_m: f64, required: f64 },
    TMaxBelowBound { t_max: u32, bound: u64 },
    BadGranularity(f64),
}

impl fmt::Display for InstanceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use InstanceViolation::*;
        match self {
            ZeroQubits(j) => write!(f, "job {j} needs at least one qubit"),
            ZeroDepth(j) => write!(f, "job {j} has zero depth"),
            ZeroCapacity(m) => write!(f, "machine {m} has zero capacity"),
            DuplicateJobId(j) => write!(f, "duplicate job id {j}"),
            DuplicateMachineId(m) => write!(f, "duplicate machine id {m}"),
            ReservedJobId(j) => write!(f, "job id {j} is reserved for the dummy job"),
            FitsNoMachine(j) => write!(f, "job {j} fits no machine"),
            ProcessingIncomplete { job, machine } => {
                write!(f, "processing table incomplete: missing ({job}, {machine})")
            }
            SetupIncomplete { pred, job, machine } => {
                write!(f, "setup table incomplete: missing ({pred}, {job}, {machine})")
            }
            NegativeTime(what) => write!(f, "negative or non-finite time: {what}"),
            NonIntegerTime(what) => write!(f, "non-integer time in integer mode: {what}"),
            BigMTooSmall { big_m, required } => {
                write!(f, "big_m {big_m} must exceed {required}")
            }
            TMaxBelowBound { t_max, bound } => {
                write!(f, "t_max {t_max} is below the lower bound {bound}")
            }
            BadGranularity(g) => write!(f, "granularity {g} must be positive"),
        }
    }
}

fn check_time(value: f64, what: impl Fn() -> String, mode: TimeMode, out: &mut Vec<InstanceViolation>) {
    if !value.is_finite() || value < 0.0 {
        out.push(InstanceViolation::NegativeTime(what()));
    } else if mode == TimeMode::Integer && value.fract() != 0.0 {
        out.push(InstanceViolation::NonIntegerTime(what()));
    }
}

/// Lists every broken instance invariant; empty when the instance is usable.
pub fn validate_instance(instance: &Instance) -> Vec<InstanceViolation> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for job in &instance.jobs {
        if job.qubits == 0 {
            out.push(InstanceViolation::ZeroQubits(job.id.clone()));
        }
        if job.depth == 0 {
            out.push(InstanceViolation::ZeroDepth(job.id.clone()));
        }
        if job.id == DUMMY {
            out.push(InstanceViolation::ReservedJobId(job.id.clone()));
        }
        if !seen.insert(job.id.as_str()) {
            out.push(InstanceViolation::DuplicateJobId(job.id.clone()));
        }
    }
    let mut seen = HashSet::new();
    for machine in &instance.machines {
        if machine.capacity == 0 {
            out.push(InstanceViolation::ZeroCapacity(machine.id.clone()));
        }
        if !seen.insert(machine.id.as_str()) {
            out.push(InstanceViolation::DuplicateMachineId(machine.id.clone()));
        }
    }
    for job in &instance.jobs {
        if !instance.machines.iter().any(|m| job.qubits <= m.capacity) {
            out.push(InstanceViolation::FitsNoMachine(job.id.clone()));
        }
    }
    if !(instance.granularity > 0.0 && instance.granularity.is_finite()) {
        out.push(InstanceViolation::BadGranularity(instance.granularity));
    }

    let mode = instance.time_mode;
    let mut complete = true;
    for job in &instance.jobs {
        for machine in &instance.machines {
            match instance.timing.processing_time(&job.id, &machine.id) {
                Some(p) => check_time(p, || format!("p({}, {})", job.id, machine.id), mode, &mut out),
                None => {
                    complete = false;
                    out.push(InstanceViolation::ProcessingIncomplete {
                        job: job.id.clone(),
                        machine: machine.id.clone(),
                    });
                }
            }
        }
    }
    let preds = std::iter::once(DUMMY).chain(instance.jobs.iter().map(|j| j.id.as_str()));
    for pred in preds {
        for job in &instance.jobs {
            if pred == job.id {
                continue;
            }
            for machine in &instance.machines {
                match instance.timing.setup_time(pred, &job.id, &machine.id) {
                    Some(s) => check_time(
                        s,
                        || format!("s({pred}, {}, {})", job.id, machine.id),
                        mode,
                        &mut out,
                    ),
                    None => {
                        complete = false;
                        out.push(InstanceViolation::SetupIncomplete {
                            pred: pred.to_string(),
                            job: job.id.clone(),
                            machine: machine.id.clone(),
                        });
                    }
                }
            }
        }
    }

    if complete && instance.granularity > 0.0 {
        if let Ok(ix) = instance.indexed() {
            let g = instance.granularity;
            let max_setup_slots = (ix.max_setup() / g - EPS).ceil().max(0.0);
            let required = instance.t_max as f64 + 1.0 + max_setup_slots;
            if instance.big_m <= required {
                out.push(InstanceViolation::BigMTooSmall {
                    big_m: instance.big_m,
                    required,
                });
            }
            if let Ok(bound) = instance.t_max_lower_bound() {
                if (instance.t_max as u64) < bound {
                    out.push(InstanceViolation::TMaxBelowBound {
                        t_max: instance.t_max,
                        bound,
                    });
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Schedule validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleViolation {
    UnknownJob(String),
    UnknownMachine(String),
    DuplicateEntry(String),
    MissingEntry(String),
    DoesNotFit { job: String, machine: String },
    CapacityExceeded { machine: String, at: f64 },
    EmptyInterval(String),
    OutsideHorizon(String),
    MakespanMismatch { stated: f64, actual: f64 },
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ScheduleViolation::*;
        match self {
            UnknownJob(j) => write!(f, "unknown job {j}"),
            UnknownMachine(m) => write!(f, "unknown machine {m}"),
            DuplicateEntry(j) => write!(f, "job {j} is scheduled more than once"),
            MissingEntry(j) => write!(f, "job {j} is not scheduled"),
            DoesNotFit { job, machine } => write!(f, "job {job} does not fit {machine}"),
            CapacityExceeded { machine, at } => {
                write!(f, "capacity exceeded on {machine} at t={at}")
            }
            EmptyInterval(j) => write!(f, "job {j} does not complete after its start"),
            OutsideHorizon(j) => write!(f, "job {j} lies outside the time horizon"),
            MakespanMismatch { stated, actual } => {
                write!(f, "makespan {stated} differs from latest completion {actual}")
            }
        }
    }
}

/// First time per machine at which the summed qubits of running jobs exceed
/// the capacity. Intervals are half-open.
pub(crate) fn capacity_overflows(
    ix: &Indexed,
    machine: &[usize],
    start: &[f64],
    completion: &[f64],
) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for k in 0..ix.m {
        // (time, is_start, qubits); completions sort before starts at equal times.
        let mut events: Vec<(f64, bool, u32)> = Vec::new();
        for j in 0..machine.len() {
            if machine[j] == k {
                events.push((start[j], true, ix.qubits[j]));
                events.push((completion[j], false, ix.qubits[j]));
            }
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut used: i64 = 0;
        for (t, is_start, q) in events {
            if is_start {
                used += q as i64;
                if used > ix.capacity[k] as i64 {
                    out.push((k, t));
                    break;
                }
            } else {
                used -= q as i64;
            }
        }
    }
    out
}

/// Lists every broken schedule invariant; empty when the schedule is feasible.
pub fn validate_schedule(schedule: &Schedule, instance: &Instance) -> Vec<ScheduleViolation> {
    let mut out = Vec::new();
    let jobs: HashMap<&str, usize> = instance
        .jobs
        .iter()
        .enumerate()
        .map(|(i, j)| (j.id.as_str(), i))
        .collect();
    let machines: HashMap<&str, usize> = instance
        .machines
        .iter()
        .enumerate()
        .map(|(i, m)| (m.id.as_str(), i))
        .collect();
    let n = instance.jobs.len();
    let mut seen = vec![false; n];
    let mut machine = vec![usize::MAX; n];
    let mut start = vec![0.0; n];
    let mut completion = vec![0.0; n];
    let horizon = instance.horizon();
    for e in &schedule.entries {
        let Some(&j) = jobs.get(e.job.as_str()) else {
            out.push(ScheduleViolation::UnknownJob(e.job.clone()));
            continue;
        };
        let Some(&k) = machines.get(e.machine.as_str()) else {
            out.push(ScheduleViolation::UnknownMachine(e.machine.clone()));
            continue;
        };
        if seen[j] {
            out.push(ScheduleViolation::DuplicateEntry(e.job.clone()));
            continue;
        }
        seen[j] = true;
        if instance.jobs[j].qubits > instance.machines[k].capacity {
            out.push(ScheduleViolation::DoesNotFit {
                job: e.job.clone(),
                machine: e.machine.clone(),
            });
        }
        if !(e.completion > e.start) {
            out.push(ScheduleViolation::EmptyInterval(e.job.clone()));
        }
        if e.start < -EPS || e.completion > horizon + EPS || !e.start.is_finite() {
            out.push(ScheduleViolation::OutsideHorizon(e.job.clone()));
        }
        machine[j] = k;
        start[j] = e.start;
        completion[j] = e.completion;
    }
    for (j, job) in instance.jobs.iter().enumerate() {
        if !seen[j] {
            out.push(ScheduleViolation::MissingEntry(job.id.clone()));
        }
    }
    let capacity: Vec<u32> = instance.machines.iter().map(|m| m.capacity).collect();
    let qubits: Vec<u32> = instance.jobs.iter().map(|j| j.qubits).collect();
    let ix = Indexed {
        n,
        m: capacity.len(),
        qubits,
        capacity,
        processing: Vec::new(),
        setup: Vec::new(),
    };
    for (k, t) in capacity_overflows(&ix, &machine, &start, &completion) {
        out.push(ScheduleViolation::CapacityExceeded {
            machine: instance.machines[k].id.clone(),
            at: t,
        });
    }
    let actual = schedule
        .entries
        .iter()
        .map(|e| e.completion)
        .fold(0.0, f64::max);
    if (actual - schedule.makespan).abs() > EPS * (1.0 + actual.abs()) {
        out.push(ScheduleViolation::MakespanMismatch {
            stated: schedule.makespan,
            actual,
        });
    }
    out
}

// ---------------------------------------------------------------------------
// Successor relation
// ---------------------------------------------------------------------------

/// Predecessor indices (`0` dummy, `k + 1` job `k`) of job `j` given the
/// current start and completion vectors.
pub(crate) fn predecessors_into(
    machine: &[usize],
    start: &[f64],
    completion: &[f64],
    j: usize,
    out: &mut Vec<usize>,
) {
    out.clear();
    let b = start[j];
    let mut latest = f64::NEG_INFINITY;
    for k in 0..machine.len() {
        if k != j && machine[k] == machine[j] && completion[k] <= b + EPS {
            latest = latest.max(completion[k]);
        }
    }
    if latest == f64::NEG_INFINITY {
        out.push(0);
        return;
    }
    for k in 0..machine.len() {
        if k != j
            && machine[k] == machine[j]
            && completion[k] <= b + EPS
            && completion[k] >= latest - EPS
        {
            out.push(k + 1);
        }
    }
}

fn resolve(
    instance: &Instance,
    items: impl Iterator<Item = (String, String)>,
) -> Result<Vec<(usize, usize)>, ModelError> {
    items
        .map(|(job, machine)| {
            let j = instance
                .job_position(&job)
                .ok_or(ModelError::UnknownJob(job))?;
            let k = instance
                .machine_position(&machine)
                .ok_or(ModelError::UnknownMachine(machine))?;
            Ok((j, k))
        })
        .collect()
}

/// The successor facts realised by a schedule, read off its start and
/// completion times.
pub fn derive_successors(
    schedule: &Schedule,
    instance: &Instance,
) -> Result<SuccessorMap, ModelError> {
    let pos = resolve(
        instance,
        schedule
            .entries
            .iter()
            .map(|e| (e.job.clone(), e.machine.clone())),
    )?;
    let machine: Vec<usize> = pos.iter().map(|p| p.1).collect();
    let start: Vec<f64> = schedule.entries.iter().map(|e| e.start).collect();
    let completion: Vec<f64> = schedule.entries.iter().map(|e| e.completion).collect();
    let mut relation = BTreeSet::new();
    let mut preds = Vec::new();
    for (idx, e) in schedule.entries.iter().enumerate() {
        predecessors_into(&machine, &start, &completion, idx, &mut preds);
        for &p in &preds {
            let pred = if p == 0 {
                Pred::Dummy
            } else {
                Pred::Job(schedule.entries[p - 1].job.clone())
            };
            relation.insert(Succession {
                pred,
                job: e.job.clone(),
                machine: e.machine.clone(),
            });
        }
    }
    Ok(SuccessorMap { relation })
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

pub(crate) enum SetupRule<'a> {
    SequenceDependent,
    JobOnly(&'a [f64]),
}

impl<'a> SetupRule<'a> {
    fn setup(
        &self,
        ix: &Indexed,
        machine: &[usize],
        start: &[f64],
        completion: &[f64],
        j: usize,
        scratch: &mut Vec<usize>,
    ) -> f64 {
        match self {
            SetupRule::JobOnly(agg) => agg[j * ix.m + machine[j]],
            SetupRule::SequenceDependent => {
                predecessors_into(machine, start, completion, j, scratch);
                scratch
                    .iter()
                    .map(|&i| ix.setup(i, j, machine[j]))
                    .fold(0.0, f64::max)
            }
        }
    }
}

/// Completion times for fixed machines and starts, iterated to a fixed point
/// of the successor relation. Returns the completions and the number of
/// passes that changed a value.
pub(crate) fn fixed_point(
    ix: &Indexed,
    machine: &[usize],
    start: &[f64],
    rule: &SetupRule<'_>,
) -> Result<(Vec<f64>, usize), ModelError> {
    let n = machine.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| start[a].total_cmp(&start[b]).then(a.cmp(&b)));
    let mut completion: Vec<f64> = (0..n)
        .map(|j| {
            let s = match rule {
                SetupRule::JobOnly(agg) => agg[j * ix.m + machine[j]],
                SetupRule::SequenceDependent => ix.setup(0, j, machine[j]),
            };
            start[j] + ix.processing(j, machine[j]) + s
        })
        .collect();
    let mut scratch = Vec::new();
    for pass in 0..=n {
        let mut changed = false;
        for &j in &order {
            let s = rule.setup(ix, machine, start, &completion, j, &mut scratch);
            let c = start[j] + ix.processing(j, machine[j]) + s;
            if (c - completion[j]).abs() > EPS {
                completion[j] = c;
                changed = true;
            }
        }
        if !changed {
            return Ok((completion, pass));
        }
    }
    Err(ModelError::NonConvergence(n))
}

fn placements_to_index(
    placements: &[Placement],
    instance: &Instance,
) -> Result<(Vec<usize>, Vec<f64>), ModelError> {
    let n = instance.jobs.len();
    let mut machine = vec![usize::MAX; n];
    let mut start = vec![0.0; n];
    for p in placements {
        let j = instance
            .job_position(&p.job)
            .ok_or_else(|| ModelError::UnknownJob(p.job.clone()))?;
        let k = instance
            .machine_position(&p.machine)
            .ok_or_else(|| ModelError::UnknownMachine(p.machine.clone()))?;
        if machine[j] != usize::MAX {
            return Err(ModelError::DuplicateJob(p.job.clone()));
        }
        machine[j] = k;
        start[j] = p.start;
    }
    if let Some(j) = machine.iter().position(|&k| k == usize::MAX) {
        return Err(ModelError::MissingJob(instance.jobs[j].id.clone()));
    }
    Ok((machine, start))
}

/// Builds a schedule from index vectors; entries follow the instance's job order.
pub(crate) fn schedule_from_index(
    instance: &Instance,
    machine: &[usize],
    start: &[f64],
    completion: &[f64],
) -> Schedule {
    Schedule::from_entries(
        (0..machine.len())
            .map(|j| ScheduleEntry {
                job: instance.jobs[j].id.clone(),
                machine: instance.machines[machine[j]].id.clone(),
                start: start[j],
                completion: completion[j],
            })
            .collect(),
    )
}

/// Computes completions `c_j = b_j + p_jm + setup_j` and the makespan for
/// the given placements. Also returns how many evaluation passes changed a
/// completion before the successor relation settled.
pub fn evaluate_schedule_traced(
    placements: &[Placement],
    instance: &Instance,
    mode: SetupMode,
) -> Result<(Schedule, usize), ModelError> {
    let ix = instance.indexed()?;
    let (machine, start) = placements_to_index(placements, instance)?;
    let agg;
    let rule = match mode {
        SetupMode::SequenceDependent => SetupRule::SequenceDependent,
        SetupMode::JobOnly => {
            agg = ix.aggregated_setup();
            SetupRule::JobOnly(&agg)
        }
    };
    let (completion, iterations) = fixed_point(&ix, &machine, &start, &rule)?;
    Ok((
        schedule_from_index(instance, &machine, &start, &completion),
        iterations,
    ))
}

pub fn evaluate_schedule(
    placements: &[Placement],
    instance: &Instance,
    mode: SetupMode,
) -> Result<Schedule, ModelError> {
    evaluate_schedule_traced(placements, instance, mode).map(|(s, _)| s)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Instance with explicit tables. `setup(i, j, m)` uses `0` for the dummy.
    pub fn instance(
        qubits: &[u32],
        capacity: &[u32],
        processing: impl Fn(usize, usize) -> f64,
        setup: impl Fn(usize, usize, usize) -> f64,
        t_max: u32,
    ) -> Instance {
        let jobs: Vec<CircuitJob> = qubits
            .iter()
            .enumerate()
            .map(|(i, &q)| CircuitJob::new(format!("J{}", i + 1), q, 1))
            .collect();
        let machines: Vec<Machine> = capacity
            .iter()
            .enumerate()
            .map(|(i, &c)| Machine::new(format!("M{}", i + 1), c))
            .collect();
        let mut timing = TimingTables::default();
        for (j, job) in jobs.iter().enumerate() {
            for (k, m) in machines.iter().enumerate() {
                timing.set_processing(&job.id, &m.id, processing(j, k));
                timing.set_setup(DUMMY, &job.id, &m.id, setup(0, j, k));
                for (i, pred) in jobs.iter().enumerate() {
                    if i != j {
                        timing.set_setup(&pred.id, &job.id, &m.id, setup(i + 1, j, k));
                    }
                }
            }
        }
        Instance {
            jobs,
            machines,
            timing,
            big_m: 1000.0,
            t_max,
            granularity: 1.0,
            time_mode: TimeMode::Integer,
        }
    }

    pub fn place(job: &str, machine: &str, start: f64) -> Placement {
        Placement {
            job: job.into(),
            machine: machine.into(),
            start,
        }
    }

    pub fn entry(job: &str, machine: &str, start: f64, completion: f64) -> ScheduleEntry {
        ScheduleEntry {
            job: job.into(),
            machine: machine.into(),
            start,
            completion,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn two_by_two() -> Instance {
        instance(&[3, 2], &[5, 5], |_, _| 3.0, |_, _, _| 1.0, 10)
    }

    #[test]
    fn well_formed_instance_has_no_violations() {
        assert!(validate_instance(&two_by_two()).is_empty());
    }

    #[test]
    fn oversized_job_is_reported() {
        let inst = instance(&[6], &[5, 5], |_, _| 1.0, |_, _, _| 1.0, 10);
        let v: Vec<String> = validate_instance(&inst).iter().map(|v| v.to_string()).collect();
        assert_eq!(v, vec!["job J1 fits no machine"]);
    }

    #[test]
    fn missing_setup_entry_is_reported() {
        let mut inst = two_by_two();
        inst.timing.setup.get_mut(DUMMY).unwrap().get_mut("J1").unwrap().remove("M2");
        let v = validate_instance(&inst);
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().starts_with("setup table incomplete"));
    }

    #[test]
    fn t_max_and_big_m_rules() {
        let mut inst = two_by_two();
        inst.t_max = 1;
        assert!(validate_instance(&inst)
            .iter()
            .any(|v| matches!(v, InstanceViolation::TMaxBelowBound { bound: 4, .. })));
        let mut inst = two_by_two();
        inst.big_m = 5.0;
        assert!(validate_instance(&inst)
            .iter()
            .any(|v| matches!(v, InstanceViolation::BigMTooSmall { .. })));
    }

    #[test]
    fn integer_mode_rejects_fractions() {
        let mut inst = two_by_two();
        inst.timing.set_processing("J1", "M1", 2.5);
        assert!(matches!(
            validate_instance(&inst)[..],
            [InstanceViolation::NonIntegerTime(_)]
        ));
    }

    #[test]
    fn single_job_has_dummy_predecessor() {
        let inst = instance(&[3], &[5], |_, _| 3.0, |_, _, _| 1.0, 10);
        let s = Schedule::from_entries(vec![entry("J1", "M1", 0.0, 4.0)]);
        let succ = derive_successors(&s, &inst).unwrap();
        assert_eq!(succ.relation.len(), 1);
        assert!(succ.contains(Pred::Dummy, "J1", "M1"));
    }

    #[test]
    fn direct_succession() {
        let inst = instance(&[3, 3], &[5], |_, _| 3.0, |_, _, _| 0.0, 10);
        let s = Schedule::from_entries(vec![
            entry("J1", "M1", 0.0, 3.0),
            entry("J2", "M1", 4.0, 7.0),
        ]);
        let succ = derive_successors(&s, &inst).unwrap();
        assert_eq!(succ.relation.len(), 2);
        assert!(succ.contains(Pred::Dummy, "J1", "M1"));
        assert!(succ.contains(Pred::Job("J1".into()), "J2", "M1"));
    }

    #[test]
    fn parallel_pair_both_precede() {
        let inst = instance(&[2, 2, 2], &[5], |_, _| 3.0, |_, _, _| 0.0, 10);
        let s = Schedule::from_entries(vec![
            entry("J1", "M1", 0.0, 3.0),
            entry("J2", "M1", 0.0, 3.0),
            entry("J3", "M1", 4.0, 7.0),
        ]);
        let succ = derive_successors(&s, &inst).unwrap();
        let preds = succ.predecessors_of("J3");
        assert_eq!(preds, vec![&Pred::Job("J1".into()), &Pred::Job("J2".into())]);
        // Brute-force oracle over all (i, k) pairs on the machine.
        for e in &s.entries {
            for i in &s.entries {
                if i.job == e.job || i.completion > e.start {
                    continue;
                }
                let blocked = s.entries.iter().any(|k| {
                    k.job != e.job && i.completion < k.completion && k.completion <= e.start
                });
                assert_eq!(
                    succ.contains(Pred::Job(i.job.clone()), &e.job, "M1"),
                    !blocked
                );
            }
        }
    }

    #[test]
    fn derive_rejects_unknown_machine() {
        let inst = two_by_two();
        let s = Schedule::from_entries(vec![entry("J1", "M9", 0.0, 3.0)]);
        assert_eq!(
            derive_successors(&s, &inst),
            Err(ModelError::UnknownMachine("M9".into()))
        );
    }

    #[test]
    fn single_job_arithmetic() {
        let inst = instance(&[3], &[5], |_, _| 5.0, |_, _, _| 2.0, 10);
        let s = evaluate_schedule(&[place("J1", "M1", 0.0)], &inst, SetupMode::SequenceDependent)
            .unwrap();
        assert_eq!(s.entries[0].completion, 7.0);
        assert_eq!(s.makespan, 7.0);
    }

    #[test]
    fn sequential_chain() {
        // s_{0,1} = 1, s_{1,2} = 2, everything else large.
        let inst = instance(
            &[4, 4],
            &[5],
            |_, _| 3.0,
            |i, j, _| match (i, j) {
                (0, 0) => 1.0,
                (1, 1) => 2.0,
                _ => 9.0,
            },
            20,
        );
        let s = evaluate_schedule(
            &[place("J1", "M1", 0.0), place("J2", "M1", 4.0)],
            &inst,
            SetupMode::SequenceDependent,
        )
        .unwrap();
        assert_eq!(s.entries[0].completion, 4.0);
        assert_eq!(s.entries[1].completion, 9.0);
        assert_eq!(s.makespan, 9.0);
    }

    #[test]
    fn combined_setup_takes_maximum() {
        let inst = instance(
            &[2, 2, 2],
            &[5],
            |_, _| 3.0,
            |i, j, _| if j == 2 { i as f64 } else { 0.0 },
            20,
        );
        let s = evaluate_schedule(
            &[
                place("J1", "M1", 0.0),
                place("J2", "M1", 0.0),
                place("J3", "M1", 3.0),
            ],
            &inst,
            SetupMode::SequenceDependent,
        )
        .unwrap();
        // Predecessors J1 (i=1) and J2 (i=2): setup max(1, 2) = 2.
        assert_eq!(s.entries[2].completion, 8.0);
    }

    #[test]
    fn job_only_uses_aggregate() {
        let inst = instance(
            &[2, 2],
            &[5],
            |_, _| 3.0,
            |i, j, _| if j == 0 { 1.0 + i as f64 * 4.0 } else { 1.0 },
            20,
        );
        let s = evaluate_schedule(&[place("J1", "M1", 0.0)].iter().cloned().chain([place("J2", "M1", 0.0)]).collect::<Vec<_>>(), &inst, SetupMode::JobOnly).unwrap();
        // s_{J1} = max(s_{0,1}=1, s_{2,1}=9) = 9.
        assert_eq!(s.entries[0].completion, 12.0);
        assert_eq!(s.entries[1].completion, 4.0);
    }

    #[test]
    fn capacity_violation_is_reported() {
        let inst = instance(&[3, 3], &[5, 5], |_, _| 3.0, |_, _, _| 0.0, 10);
        let s = Schedule::from_entries(vec![
            entry("J1", "M1", 0.0, 3.0),
            entry("J2", "M1", 0.0, 3.0),
        ]);
        let v: Vec<String> = validate_schedule(&s, &inst).iter().map(|v| v.to_string()).collect();
        assert_eq!(v, vec!["capacity exceeded on M1 at t=0"]);
    }

    #[test]
    fn feasible_two_machine_schedule() {
        let inst = instance(&[3, 3], &[5, 5], |_, _| 3.0, |_, _, _| 0.0, 10);
        let s = Schedule::from_entries(vec![
            entry("J1", "M1", 0.0, 3.0),
            entry("J2", "M2", 0.0, 3.0),
        ]);
        assert!(validate_schedule(&s, &inst).is_empty());
        // Back-to-back on one machine is fine with half-open intervals.
        let s = Schedule::from_entries(vec![
            entry("J1", "M1", 0.0, 3.0),
            entry("J2", "M1", 3.0, 6.0),
        ]);
        assert!(validate_schedule(&s, &inst).is_empty());
    }

    #[test]
    fn misfit_is_reported() {
        let inst = instance(&[4], &[5, 3], |_, _| 3.0, |_, _, _| 0.0, 10);
        let s = Schedule::from_entries(vec![entry("J1", "M2", 0.0, 3.0)]);
        let v: Vec<String> = validate_schedule(&s, &inst).iter().map(|v| v.to_string()).collect();
        assert_eq!(v, vec!["job J1 does not fit M2", "capacity exceeded on M2 at t=0"]);
    }

    #[test]
    fn horizon_and_missing_entries() {
        let inst = instance(&[1, 1], &[5], |_, _| 3.0, |_, _, _| 0.0, 4);
        let s = Schedule::from_entries(vec![entry("J1", "M1", 3.0, 6.0)]);
        let v = validate_schedule(&s, &inst);
        assert!(v.contains(&ScheduleViolation::OutsideHorizon("J1".into())));
        assert!(v.contains(&ScheduleViolation::MissingEntry("J2".into())));
    }

    #[test]
    fn evaluation_reports_converged_passes() {
        let inst = instance(&[5, 5, 5], &[5], |_, _| 2.0, |_, _, _| 1.0, 20);
        let (s, passes) = evaluate_schedule_traced(
            &[
                place("J1", "M1", 0.0),
                place("J2", "M1", 3.0),
                place("J3", "M1", 6.0),
            ],
            &inst,
            SetupMode::SequenceDependent,
        )
        .unwrap();
        assert!(passes <= 3);
        assert_eq!(s.makespan, 9.0);
    }
}
