//! Seeded synthetic processing and setup times.
//!
//! Processing: `p_im = scale · q_i · (1 + u)`. Setup:
//! `s_ijm = setup_scale · (q_i + q_j) / 2 · (1 + u)` with `q_0` the dummy
//! size. `u ~ Uniform(-v, v)` is drawn per cell. Each table owns one ChaCha
//! stream, advanced in row-major order (`i`, then `j`, then `m`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{CircuitJob, Instance, Machine, TimeMode, TimingTables, DUMMY};

const PROCESSING_STREAM: u64 = 1;
const SETUP_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingConfig {
    pub seed: u64,
    pub mode: TimeMode,
    pub base_processing_scale: f64,
    /// Half-width of the uniform relative variation, in `[0, 1)`.
    pub variation_fraction: f64,
    pub setup_scale: f64,
    /// When set, processing is also multiplied by `depth / depth_reference`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_reference: Option<f64>,
    /// Size used for the dummy predecessor in setup generation.
    #[serde(default)]
    pub dummy_qubits: f64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            mode: TimeMode::Integer,
            base_processing_scale: 1.0,
            variation_fraction: 0.25,
            setup_scale: 0.5,
            depth_reference: None,
            dummy_qubits: 0.0,
        }
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn vary(rng: &mut ChaCha8Rng, fraction: f64) -> f64 {
    let r: f64 = rng.gen();
    1.0 + fraction * (2.0 * r - 1.0)
}

fn round_up(value: f64, floor: f64) -> f64 {
    (value - 1e-9).ceil().max(floor)
}

/// `p[job][machine]`.
pub fn gen_processing(jobs: &[CircuitJob], machines: &[Machine], config: &TimingConfig) -> Vec<Vec<f64>> {
    let mut rng = stream(config.seed, PROCESSING_STREAM);
    jobs.iter()
        .map(|job| {
            let depth_factor = config
                .depth_reference
                .map_or(1.0, |r| job.depth as f64 / r);
            machines
                .iter()
                .map(|_| {
                    let p = config.base_processing_scale
                        * job.qubits as f64
                        * depth_factor
                        * vary(&mut rng, config.variation_fraction);
                    match config.mode {
                        TimeMode::Integer => round_up(p, 1.0),
                        TimeMode::Real => p,
                    }
                })
                .collect()
        })
        .collect()
}

/// `s[pred][job][machine]`; `pred` 0 is the dummy, `pred = i + 1` is job `i`.
/// The diagonal `s_jjm` is generated to keep the stream layout simple but is
/// never read.
pub fn gen_setup(jobs: &[CircuitJob], machines: &[Machine], config: &TimingConfig) -> Vec<Vec<Vec<f64>>> {
    let mut rng = stream(config.seed, SETUP_STREAM);
    let sizes: Vec<f64> = std::iter::once(config.dummy_qubits)
        .chain(jobs.iter().map(|j| j.qubits as f64))
        .collect();
    sizes
        .iter()
        .map(|&qi| {
            jobs.iter()
                .map(|job| {
                    machines
                        .iter()
                        .map(|_| {
                            let s = config.setup_scale
                                * (qi + job.qubits as f64)
                                / 2.0
                                * vary(&mut rng, config.variation_fraction);
                            match config.mode {
                                TimeMode::Integer => round_up(s, 0.0),
                                TimeMode::Real => s,
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Job-only setup `s[job][machine] = max over pred != job of s[pred][job][machine]`.
pub fn aggregate_setup_max(setup: &[Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
    let n = setup.first().map_or(0, |row| row.len());
    (0..n)
        .map(|j| {
            let m = setup[0][j].len();
            (0..m)
                .map(|k| {
                    setup
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != j + 1)
                        .map(|(_, row)| row[j][k])
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect()
        })
        .collect()
}

/// Packs dense tables into the id-keyed form stored in an [`Instance`].
pub fn to_tables(
    jobs: &[CircuitJob],
    machines: &[Machine],
    processing: &[Vec<f64>],
    setup: &[Vec<Vec<f64>>],
) -> TimingTables {
    let mut tables = TimingTables::default();
    for (j, job) in jobs.iter().enumerate() {
        for (k, machine) in machines.iter().enumerate() {
            tables.set_processing(&job.id, &machine.id, processing[j][k]);
        }
    }
    for (i, row) in setup.iter().enumerate() {
        let pred = if i == 0 { DUMMY } else { jobs[i - 1].id.as_str() };
        for (j, job) in jobs.iter().enumerate() {
            if i == j + 1 {
                continue;
            }
            for (k, machine) in machines.iter().enumerate() {
                tables.set_setup(pred, &job.id, &machine.id, row[j][k]);
            }
        }
    }
    tables
}

pub fn gen_tables(jobs: &[CircuitJob], machines: &[Machine], config: &TimingConfig) -> TimingTables {
    to_tables(
        jobs,
        machines,
        &gen_processing(jobs, machines, config),
        &gen_setup(jobs, machines, config),
    )
}

/// Instance with generated timing and explicit metaparameters.
pub fn build_instance(
    jobs: Vec<CircuitJob>,
    machines: Vec<Machine>,
    config: &TimingConfig,
    big_m: f64,
    t_max: u32,
    granularity: f64,
) -> Instance {
    let timing = gen_tables(&jobs, &machines, config);
    Instance {
        jobs,
        machines,
        timing,
        big_m,
        t_max,
        granularity,
        time_mode: config.mode,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jobs(qubits: &[u32]) -> Vec<CircuitJob> {
        qubits
            .iter()
            .enumerate()
            .map(|(i, &q)| CircuitJob::new(format!("J{}", i + 1), q, 10))
            .collect()
    }

    fn machines(n: usize) -> Vec<Machine> {
        (0..n).map(|i| Machine::new(format!("M{}", i + 1), 5)).collect()
    }

    fn flat(scale: f64) -> TimingConfig {
        TimingConfig {
            variation_fraction: 0.0,
            base_processing_scale: scale,
            setup_scale: scale,
            ..TimingConfig::default()
        }
    }

    #[test]
    fn degenerate_variation_gives_mean_processing() {
        let p = gen_processing(&jobs(&[5]), &machines(3), &flat(1.0));
        assert_eq!(p, vec![vec![5.0, 5.0, 5.0]]);
    }

    #[test]
    fn degenerate_variation_gives_mean_setup() {
        let s = gen_setup(&jobs(&[4, 2]), &machines(2), &flat(1.0));
        // J1 (q=4) before J2 (q=2).
        assert_eq!(s[1][1], vec![3.0, 3.0]);
        // Dummy before J1: (0 + 4) / 2.
        assert_eq!(s[0][0], vec![2.0, 2.0]);
    }

    #[test]
    fn seeded_tables_repeat() {
        let cfg = TimingConfig {
            seed: 42,
            ..TimingConfig::default()
        };
        let js = jobs(&[2, 3, 5, 4]);
        let ms = machines(2);
        assert_eq!(gen_tables(&js, &ms, &cfg), gen_tables(&js, &ms, &cfg));
        let other = TimingConfig { seed: 43, ..cfg };
        assert_ne!(gen_tables(&js, &ms, &cfg), gen_tables(&js, &ms, &other));
    }

    #[test]
    fn integer_mode_is_integral_real_mode_is_distinct() {
        let js = jobs(&[2, 3, 5, 4, 5, 2, 3, 4, 5]);
        let ms = machines(3);
        let int = gen_setup(&js, &ms, &TimingConfig::default());
        assert!(int.iter().flatten().flatten().all(|v| v.fract() == 0.0 && *v >= 0.0));
        let real_cfg = TimingConfig {
            mode: TimeMode::Real,
            ..TimingConfig::default()
        };
        let mut real: Vec<f64> = gen_processing(&js, &ms, &real_cfg).into_iter().flatten().collect();
        real.sort_by(f64::total_cmp);
        real.dedup();
        assert_eq!(real.len(), js.len() * ms.len());
    }

    #[test]
    fn aggregation_takes_column_max() {
        // Column for (J1, M1): dummy 2, J2 5.
        let setup = vec![
            vec![vec![2.0], vec![1.0]],
            vec![vec![99.0], vec![4.0]],
            vec![vec![5.0], vec![0.0]],
        ];
        let agg = aggregate_setup_max(&setup);
        assert_eq!(agg[0][0], 5.0);
        assert_eq!(agg[1][0], 4.0);
        let equal = vec![vec![vec![3.0]; 2]; 3];
        assert_eq!(aggregate_setup_max(&equal), vec![vec![3.0], vec![3.0]]);
    }

    #[test]
    fn aggregation_matches_brute_force() {
        let js = jobs(&[1, 2, 3, 4, 5, 1, 2, 3, 4]);
        let ms = machines(2);
        let cfg = TimingConfig {
            seed: 9,
            mode: TimeMode::Real,
            ..TimingConfig::default()
        };
        let setup = gen_setup(&js, &ms, &cfg);
        let agg = aggregate_setup_max(&setup);
        for j in 0..js.len() {
            for k in 0..ms.len() {
                let mut best = f64::MIN;
                for (i, row) in setup.iter().enumerate() {
                    if i != j + 1 && row[j][k] > best {
                        best = row[j][k];
                    }
                }
                assert_eq!(agg[j][k], best);
                for (i, row) in setup.iter().enumerate() {
                    if i != j + 1 {
                        assert!(agg[j][k] >= row[j][k]);
                    }
                }
            }
        }
    }
}
