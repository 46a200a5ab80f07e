//! Frozen outputs. Set `MILQ_BLESS=1` to rewrite the files after an
//! intentional change.

use std::path::PathBuf;

use milq_core::milp::{build_extended, build_simple, serialize_lp};
use milq_core::model::{CircuitJob, Instance, Machine, TimeMode, TimingTables, DUMMY};
use milq_core::timing::{gen_tables, TimingConfig};

fn check(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name);
    if std::env::var_os("MILQ_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "{name} drifted");
}

#[test]
fn timing_tables_seed_7() {
    let jobs: Vec<CircuitJob> = [2, 3, 5]
        .iter()
        .enumerate()
        .map(|(i, &q)| CircuitJob::new(format!("J{}", i + 1), q, 4))
        .collect();
    let machines = vec![Machine::new("M1", 5), Machine::new("M2", 7)];
    for (mode, name) in [(TimeMode::Integer, "timing_seed7_int.json"), (TimeMode::Real, "timing_seed7_real.json")] {
        let config = TimingConfig {
            seed: 7,
            mode,
            ..TimingConfig::default()
        };
        let tables = gen_tables(&jobs, &machines, &config);
        check(name, &(serde_json::to_string_pretty(&tables).unwrap() + "\n"));
    }
}

fn one_job() -> Instance {
    let mut timing = TimingTables::default();
    timing.set_processing("J1", "M1", 2.0);
    timing.set_setup(DUMMY, "J1", "M1", 1.0);
    Instance {
        jobs: vec![CircuitJob::new("J1", 2, 1)],
        machines: vec![Machine::new("M1", 5)],
        timing,
        big_m: 10.0,
        t_max: 4,
        granularity: 1.0,
        time_mode: TimeMode::Integer,
    }
}

#[test]
fn one_job_lp_files() {
    check("one_job_extended.lp", &serialize_lp(&build_extended(&one_job()).unwrap()));
    check("one_job_simple.lp", &serialize_lp(&build_simple(&one_job()).unwrap()));
}
