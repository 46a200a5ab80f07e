use milq_core::bench::random_small_instance;
use milq_core::model::{
    validate_schedule, CircuitJob, Instance, Machine, TimeMode, TimingTables, DUMMY,
};
use milq_core::solvers::{
    ffd_pack, solve, solve_baseline, solve_greedy, solve_oracle, BinState, SolveError, SolverOptions,
    Strategy,
};

fn uniform_instance(qubits: &[u32], caps: &[u32], p: f64, s: f64) -> Instance {
    let jobs: Vec<CircuitJob> = qubits
        .iter()
        .enumerate()
        .map(|(i, &q)| CircuitJob::new(format!("J{}", i + 1), q, 1))
        .collect();
    let machines: Vec<Machine> = caps
        .iter()
        .enumerate()
        .map(|(k, &c)| Machine::new(format!("M{}", k + 1), c))
        .collect();
    let mut timing = TimingTables::default();
    for j in &jobs {
        for m in &machines {
            timing.set_processing(&j.id, &m.id, p);
            timing.set_setup(DUMMY, &j.id, &m.id, s);
            for i in &jobs {
                if i.id != j.id {
                    timing.set_setup(&i.id, &j.id, &m.id, s);
                }
            }
        }
    }
    Instance {
        jobs,
        machines,
        timing,
        big_m: 1000.0,
        t_max: 100,
        granularity: 1.0,
        time_mode: TimeMode::Integer,
    }
}

fn qubit_contents(inst: &Instance, contents: &[String]) -> Vec<u32> {
    contents
        .iter()
        .map(|id| inst.jobs.iter().find(|j| &j.id == id).unwrap().qubits)
        .collect()
}

#[test]
fn ffd_packs_the_reference_batch() {
    let inst = uniform_instance(&[5, 5, 5, 5, 3, 2, 2, 2, 2], &[5, 5], 1.0, 0.0);
    let bins = ffd_pack(&inst);
    let by_gen: Vec<(usize, &str, Vec<u32>)> = bins
        .iter()
        .map(|b| (b.generation, b.machine.as_str(), qubit_contents(&inst, &b.contents)))
        .collect();
    assert_eq!(
        by_gen,
        vec![
            (0, "M1", vec![5]),
            (0, "M2", vec![5]),
            (1, "M1", vec![5]),
            (1, "M2", vec![5]),
            (2, "M1", vec![3, 2]),
            (2, "M2", vec![2, 2]),
            (3, "M1", vec![2]),
            (3, "M2", vec![]),
        ]
    );
    assert!(bins.iter().all(|b| b.state == BinState::Closed));
    for b in &bins {
        let used: u32 = qubit_contents(&inst, &b.contents).iter().sum();
        assert_eq!(b.remaining + used, 5);
    }
    // Ties on width go by id.
    assert_eq!(bins[0].contents, vec!["J1"]);
    assert_eq!(bins[5].contents, vec!["J7", "J8"]);
}

#[test]
fn baseline_generations_run_back_to_back() {
    let inst = uniform_instance(&[5, 5, 5, 5, 3, 2, 2, 2, 2], &[5, 5], 3.0, 1.0);
    let r = solve_baseline(&inst).unwrap();
    assert!(validate_schedule(&r.schedule, &inst).is_empty());
    // Four generations of 4 time units on M1.
    assert_eq!(r.schedule.makespan, 16.0);
    let e = r.schedule.entry("J9").unwrap();
    assert_eq!((e.machine.as_str(), e.start), ("M1", 12.0));
}

#[test]
fn baseline_single_job_and_full_width_jobs() {
    let one = uniform_instance(&[3], &[5, 5], 4.0, 2.0);
    let bins = ffd_pack(&one);
    assert_eq!(bins.iter().filter(|b| !b.contents.is_empty()).count(), 1);
    let r = solve_baseline(&one).unwrap();
    assert_eq!(r.schedule.entries[0].start, 0.0);

    let full = uniform_instance(&[5; 7], &[5, 5], 2.0, 0.0);
    let bins = ffd_pack(&full);
    let generations = bins.iter().map(|b| b.generation).max().unwrap() + 1;
    assert_eq!(generations, 4);
    assert!(bins.iter().all(|b| b.contents.len() <= 1));
}

#[test]
fn baseline_is_deterministic() {
    let inst = random_small_instance(11, 5, 2, 5, 30);
    assert_eq!(ffd_pack(&inst), ffd_pack(&inst));
    assert_eq!(
        solve_baseline(&inst).unwrap().schedule,
        solve_baseline(&inst).unwrap().schedule
    );
}

#[test]
fn oracle_single_job_takes_best_machine() {
    let mut inst = uniform_instance(&[2], &[5, 5], 5.0, 2.0);
    inst.timing.set_processing("J1", "M2", 3.0);
    let (r, check) = solve_oracle(&inst, 5).unwrap();
    assert_eq!(r.makespan(), 5.0);
    assert_eq!(r.schedule.entries[0].machine, "M2");
    assert!(check.agrees());
}

#[test]
fn oracle_runs_fitting_jobs_in_parallel() {
    let mut inst = uniform_instance(&[2, 3], &[5], 4.0, 1.0);
    inst.timing.set_processing("J2", "M1", 6.0);
    let (r, _) = solve_oracle(&inst, 5).unwrap();
    assert_eq!(r.makespan(), 7.0);
    assert!(r.schedule.entries.iter().all(|e| e.start == 0.0));
}

#[test]
fn oracle_rejects_large_instances() {
    let inst = uniform_instance(&[1; 6], &[5, 5], 1.0, 0.0);
    assert!(matches!(
        solve_oracle(&inst, 5),
        Err(SolveError::TooLarge { jobs: 6, limit: 5 })
    ));
}

#[test]
fn oracle_methods_agree_on_small_integer_instances() {
    for seed in 0..60 {
        let inst = random_small_instance(seed, 3, 2, 5, 30);
        let (_, check) = solve_oracle(&inst, 5).unwrap();
        assert!(check.agrees(), "seed {seed}: {check:?}");
    }
}

#[test]
fn greedy_never_beats_oracle() {
    for seed in 0..50 {
        let inst = random_small_instance(1000 + seed, 4, 2, 5, 30);
        let greedy = solve_greedy(&inst).unwrap();
        let (oracle, _) = solve_oracle(&inst, 5).unwrap();
        assert!(validate_schedule(&greedy.schedule, &inst).is_empty(), "seed {seed}");
        assert!(greedy.makespan() >= oracle.makespan() - 1e-9, "seed {seed}");
        let baseline = solve_baseline(&inst).unwrap();
        assert!(baseline.makespan() >= oracle.makespan() - 1e-9, "seed {seed}");
        if inst.jobs.len() == 1 {
            assert_eq!(greedy.makespan(), oracle.makespan());
        }
    }
}

#[test]
fn milp_strategies_need_a_solver() {
    let inst = uniform_instance(&[2], &[5], 1.0, 0.0);
    let options = SolverOptions {
        command: Some("  ".into()),
        ..SolverOptions::default()
    };
    if std::env::var(milq_core::solvers::SOLVER_ENV).is_err() {
        for s in [Strategy::Simple, Strategy::Extended] {
            assert!(matches!(
                solve(&inst, s, &options),
                Err(SolveError::NoSolverConfigured)
            ));
        }
    }
}

#[test]
fn real_mode_strategies_stay_feasible() {
    for seed in 0..30 {
        let mut inst = random_small_instance(500 + seed, 4, 2, 5, 30);
        inst.time_mode = TimeMode::Real;
        for e in inst.timing.processing.values_mut().flat_map(|m| m.values_mut()) {
            *e += 0.37;
        }
        for s in [Strategy::Baseline, Strategy::Greedy, Strategy::Oracle] {
            let r = solve(&inst, s, &SolverOptions::default()).unwrap();
            assert!(validate_schedule(&r.schedule, &inst).is_empty(), "{s} seed {seed}");
        }
    }
}
