//! Random batches, the two reference hardware scenarios and makespan
//! comparison across strategies.

use std::collections::BTreeMap;
use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cutter::{resize_batch, CircuitSpec, CutError, DEFAULT_JOB_CAP, DEFAULT_VARIANTS_PER_CUT};
use crate::model::{CircuitJob, Instance, Machine, TimeMode, TimingTables, DUMMY};
use crate::par::{self, Execution};
use crate::solvers::{self, solve_baseline, SolveError, SolverOptions, Strategy};
use crate::timing::{build_instance, TimingConfig};

pub const PAPER_TWO_QPU: &str = "paper-two-qpu";
pub const PAPER_THREE_QPU: &str = "paper-three-qpu";
/// Horizon headroom over the baseline makespan.
pub const T_MAX_FACTOR: f64 = 1.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub machines: Vec<Machine>,
    pub batches: usize,
    pub batch_size: usize,
    pub timing: TimingConfig,
    #[serde(default = "default_min_width")]
    pub min_width: u32,
    #[serde(default = "default_depths")]
    pub depth_range: (u32, u32),
    #[serde(default = "default_granularity")]
    pub granularity: f64,
}

fn default_min_width() -> u32 {
    2
}
fn default_depths() -> (u32, u32) {
    (5, 50)
}
fn default_granularity() -> f64 {
    1.0
}

/// Timing used by the built-in scenarios: processing grows with width,
/// setups with the widths of both jobs.
pub fn default_timing(seed: u64, mode: TimeMode) -> TimingConfig {
    TimingConfig {
        seed,
        mode,
        base_processing_scale: 1.0,
        variation_fraction: 0.5,
        setup_scale: 0.5,
        depth_reference: None,
        dummy_qubits: 0.0,
    }
}

impl Scenario {
    pub fn paper_two_qpu(seed: u64, mode: TimeMode) -> Self {
        Self {
            name: PAPER_TWO_QPU.into(),
            machines: vec![Machine::new("QPU1", 5), Machine::new("QPU2", 5)],
            batches: 10,
            batch_size: 7,
            timing: default_timing(seed, mode),
            min_width: default_min_width(),
            depth_range: default_depths(),
            granularity: default_granularity(),
        }
    }

    pub fn paper_three_qpu(seed: u64, mode: TimeMode) -> Self {
        Self {
            name: PAPER_THREE_QPU.into(),
            machines: vec![
                Machine::new("QPU1", 5),
                Machine::new("QPU2", 6),
                Machine::new("QPU3", 20),
            ],
            ..Self::paper_two_qpu(seed, mode)
        }
    }

    pub fn builtin(name: &str, seed: u64, mode: TimeMode) -> Option<Self> {
        match name {
            PAPER_TWO_QPU => Some(Self::paper_two_qpu(seed, mode)),
            PAPER_THREE_QPU => Some(Self::paper_three_qpu(seed, mode)),
            _ => None,
        }
    }

    pub fn batch_seed(&self, batch: usize) -> u64 {
        self.timing.seed.wrapping_add(batch as u64)
    }
}

/// Circuits A (width 7) and B (width 3), depth 10 each, cut for two
/// 5-qubit machines with four variants: nine jobs, `M = 1000`, `T_max = 64`.
pub fn example_instance(seed: u64, mode: TimeMode) -> Result<Instance, CutError> {
    let machines = vec![Machine::new("M1", 5), Machine::new("M2", 5)];
    let circuits = [CircuitSpec::new("A", 7, 10), CircuitSpec::new("B", 3, 10)];
    let (jobs, _) = resize_batch(&circuits, &machines, DEFAULT_VARIANTS_PER_CUT, DEFAULT_JOB_CAP)?;
    let timing = TimingConfig {
        seed,
        mode,
        ..TimingConfig::default()
    };
    Ok(build_instance(jobs, machines, &timing, 1000.0, 64, 1.0))
}

/// Small integral instance for cross-checks: 1 to `max_jobs` jobs of 1 to 5
/// qubits on `machines` machines of capacity 5, processing in
/// `1..=max_time`, setups in `0..=max_time`.
pub fn random_small_instance(
    seed: u64,
    max_jobs: usize,
    machines: usize,
    max_time: u32,
    t_max: u32,
) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_jobs.max(1));
    let jobs: Vec<CircuitJob> = (0..n)
        .map(|i| CircuitJob::new(format!("J{}", i + 1), rng.gen_range(1..=5), 1))
        .collect();
    let machines: Vec<Machine> = (0..machines.max(1))
        .map(|k| Machine::new(format!("M{}", k + 1), 5))
        .collect();
    let mut timing = TimingTables::default();
    let mut longest = 0u32;
    for job in &jobs {
        for m in &machines {
            let p = rng.gen_range(1..=max_time.max(1));
            timing.set_processing(&job.id, &m.id, p as f64);
            let mut worst = 0;
            for pred in std::iter::once(DUMMY).chain(jobs.iter().map(|j| j.id.as_str())) {
                if pred == job.id {
                    continue;
                }
                let s = rng.gen_range(0..=max_time);
                worst = worst.max(s);
                timing.set_setup(pred, &job.id, &m.id, s as f64);
            }
            longest = longest.max(p + worst);
        }
    }
    Instance {
        jobs,
        machines,
        timing,
        big_m: f64::from(t_max + longest + 1),
        t_max,
        granularity: 1.0,
        time_mode: TimeMode::Integer,
    }
}

/// Sets `t_max` to `ceil(1.2 · baseline / granularity)` and `big_m` to
/// `t_max + max_j,m (p_jm + max_i s_ijm) + 1`, both in slots.
pub fn apply_default_sizing(instance: &mut Instance) -> Result<(), SolveError> {
    let g = instance.granularity;
    let ix = instance.indexed()?;
    let agg = ix.aggregated_setup();
    let longest = (0..ix.n)
        .flat_map(|j| (0..ix.m).map(move |k| (j, k)))
        .map(|(j, k)| ix.processing(j, k) + agg[j * ix.m + k])
        .fold(0.0, f64::max);
    instance.t_max = 1;
    instance.big_m = f64::MAX;
    let baseline = solve_baseline(instance)?.schedule.makespan;
    let bound = instance.t_max_lower_bound()?;
    let t_max = ((T_MAX_FACTOR * baseline / g) - 1e-9).ceil().max(bound as f64).max(1.0);
    instance.t_max = t_max as u32;
    instance.big_m = t_max + (longest / g).ceil() + 1.0;
    Ok(())
}

/// Batch `batch` of a scenario: uniform widths in `[min_width, max capacity]`
/// and depths in `depth_range`, with generated timing and default sizing.
pub fn gen_batch(scenario: &Scenario, batch: usize) -> Result<Instance, SolveError> {
    let seed = scenario.batch_seed(batch);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_width = scenario.machines.iter().map(|m| m.capacity).max().unwrap_or(1);
    let min_width = scenario.min_width.clamp(1, max_width);
    let (dlo, dhi) = scenario.depth_range;
    let jobs: Vec<CircuitJob> = (0..scenario.batch_size)
        .map(|i| {
            let width = rng.gen_range(min_width..=max_width);
            let depth = rng.gen_range(dlo.max(1)..=dhi.max(dlo.max(1)));
            CircuitJob::new(format!("C{}", i + 1), width, depth)
        })
        .collect();
    let timing = TimingConfig {
        seed,
        ..scenario.timing.clone()
    };
    let mut instance = build_instance(
        jobs,
        scenario.machines.clone(),
        &timing,
        1.0,
        1,
        scenario.granularity,
    );
    apply_default_sizing(&mut instance)?;
    Ok(instance)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub scenario: String,
    pub batch: usize,
    pub seed: u64,
    pub strategy: Strategy,
    /// Sequence-dependent makespan; `None` when the strategy failed.
    pub makespan: Option<f64>,
    pub status: String,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario: String,
    pub batches: usize,
    /// Mean of `(baseline - strategy) / baseline` per strategy.
    pub mean_improvement: BTreeMap<Strategy, f64>,
    /// Batches where the strategy has a makespan, per strategy.
    pub compared_batches: BTreeMap<Strategy, usize>,
    /// Batches where the simple model loses to the baseline.
    pub simple_worse_than_baseline: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub summaries: Vec<ScenarioSummary>,
}

pub fn improvement(baseline: f64, other: f64) -> f64 {
    if baseline > 0.0 {
        (baseline - other) / baseline
    } else {
        0.0
    }
}

fn run_batch(
    scenario: &Scenario,
    batch: usize,
    strategies: &[Strategy],
    options: &SolverOptions,
) -> Vec<BenchRow> {
    let seed = scenario.batch_seed(batch);
    let row = |strategy, makespan, status: String, wall| BenchRow {
        scenario: scenario.name.clone(),
        batch,
        seed,
        strategy,
        makespan,
        status,
        wall_time_s: wall,
    };
    let instance = match gen_batch(scenario, batch) {
        Ok(i) => i,
        Err(e) => {
            return strategies
                .iter()
                .map(|&s| row(s, None, format!("error: {e}"), 0.0))
                .collect()
        }
    };
    strategies
        .iter()
        .map(|&strategy| match solvers::solve(&instance, strategy, options) {
            Ok(result) => row(
                strategy,
                Some(result.makespan()),
                result
                    .solver_status
                    .map_or_else(|| "ok".to_string(), |s| s.to_string()),
                result.wall_time,
            ),
            Err(e) => row(strategy, None, format!("error: {e}"), 0.0),
        })
        .collect()
}

fn summarise(scenario: &Scenario, rows: &[BenchRow]) -> ScenarioSummary {
    let mut by_batch: BTreeMap<usize, BTreeMap<Strategy, f64>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.scenario == scenario.name) {
        if let Some(m) = r.makespan {
            by_batch.entry(r.batch).or_default().insert(r.strategy, m);
        }
    }
    let mut sums: BTreeMap<Strategy, (f64, usize)> = BTreeMap::new();
    let mut simple_worse = 0;
    for spans in by_batch.values() {
        let Some(&base) = spans.get(&Strategy::Baseline) else {
            continue;
        };
        for (&strategy, &m) in spans {
            if strategy == Strategy::Baseline {
                continue;
            }
            let entry = sums.entry(strategy).or_insert((0.0, 0));
            entry.0 += improvement(base, m);
            entry.1 += 1;
        }
        if spans.get(&Strategy::Simple).is_some_and(|&s| s > base + 1e-9) {
            simple_worse += 1;
        }
    }
    ScenarioSummary {
        scenario: scenario.name.clone(),
        batches: scenario.batches,
        mean_improvement: sums
            .iter()
            .map(|(&s, &(total, count))| (s, total / count as f64))
            .collect(),
        compared_batches: sums.iter().map(|(&s, &(_, count))| (s, count)).collect(),
        simple_worse_than_baseline: simple_worse,
    }
}

/// Runs every strategy on every batch. Rows come back in scenario, batch,
/// strategy order whatever the execution policy.
pub fn run_scenarios(
    scenarios: &[Scenario],
    strategies: &[Strategy],
    options: &SolverOptions,
    exec: Execution,
) -> BenchReport {
    let work: Vec<(usize, usize)> = scenarios
        .iter()
        .enumerate()
        .flat_map(|(s, sc)| (0..sc.batches).map(move |b| (s, b)))
        .collect();
    let rows: Vec<BenchRow> = par::map(exec, &work, |&(s, b)| {
        run_batch(&scenarios[s], b, strategies, options)
    })
    .into_iter()
    .flatten()
    .collect();
    let summaries = scenarios.iter().map(|sc| summarise(sc, &rows)).collect();
    BenchReport { rows, summaries }
}

impl BenchReport {
    /// CSV with columns `scenario,batch,seed,strategy,makespan,status,wall_time_s`.
    /// Wall times are rounded to milliseconds.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scenario,batch,seed,strategy,makespan,status,wall_time_s\n");
        for r in &self.rows {
            let makespan = r.makespan.map_or_else(String::new, |m| format!("{m}"));
            let status = r.status.replace([',', '\n'], " ");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{:.3}",
                r.scenario, r.batch, r.seed, r.strategy, makespan, status, r.wall_time_s
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}
