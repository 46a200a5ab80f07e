use milq_core::bench::random_small_instance;
use milq_core::model::{
    derive_successors, evaluate_schedule, evaluate_schedule_traced, validate_schedule, Instance,
    Placement, Pred, Schedule, SetupMode,
};
use milq_core::solvers::{solve_baseline, solve_greedy};

/// Predecessors straight from the successor definition: `i` precedes `j` on
/// `m` when `c_i <= b_j` and no `k` on `m` has `c_i < c_k <= b_j`; the dummy
/// when nothing on `m` completes by `b_j`.
fn brute_predecessors(s: &Schedule, job: &str) -> Vec<Pred> {
    let j = s.entry(job).unwrap();
    let same: Vec<_> = s
        .entries
        .iter()
        .filter(|e| e.machine == j.machine && e.job != j.job)
        .collect();
    let mut out: Vec<Pred> = same
        .iter()
        .filter(|i| i.completion <= j.start)
        .filter(|i| {
            !same
                .iter()
                .any(|k| i.completion < k.completion && k.completion <= j.start)
        })
        .map(|i| Pred::Job(i.job.clone()))
        .collect();
    if out.is_empty() {
        out.push(Pred::Dummy);
    }
    out.sort();
    out
}

fn schedules(inst: &Instance) -> Vec<Schedule> {
    vec![
        solve_baseline(inst).unwrap().schedule,
        solve_greedy(inst).unwrap().schedule,
    ]
}

#[test]
fn successors_match_brute_force() {
    for seed in 0..100 {
        let inst = random_small_instance(seed, 5, 2, 5, 30);
        for s in schedules(&inst) {
            let map = derive_successors(&s, &inst).unwrap();
            for e in &s.entries {
                let mut got: Vec<Pred> = map.predecessors_of(&e.job).into_iter().cloned().collect();
                got.sort();
                assert_eq!(got, brute_predecessors(&s, &e.job), "seed {seed} job {}", e.job);
            }
        }
    }
}

#[test]
fn evaluation_is_idempotent() {
    for seed in 0..100 {
        let inst = random_small_instance(seed, 5, 2, 5, 30);
        for s in schedules(&inst) {
            let again = evaluate_schedule(&s.placements(), &inst, SetupMode::SequenceDependent).unwrap();
            assert_eq!(again, s, "seed {seed}");
        }
    }
}

#[test]
fn shifting_starts_shifts_makespan() {
    for seed in 0..50 {
        let inst = random_small_instance(seed, 5, 2, 5, 30);
        let s = solve_greedy(&inst).unwrap().schedule;
        let shifted: Vec<Placement> = s
            .placements()
            .into_iter()
            .map(|p| Placement {
                start: p.start + 3.0,
                ..p
            })
            .collect();
        let t = evaluate_schedule(&shifted, &inst, SetupMode::SequenceDependent).unwrap();
        assert_eq!(t.makespan, s.makespan + 3.0, "seed {seed}");
    }
}

#[test]
fn raising_a_setup_never_lowers_makespan() {
    let mut checked = 0;
    for seed in 0..50 {
        let inst = random_small_instance(seed, 5, 2, 5, 30);
        let placements = solve_baseline(&inst).unwrap().schedule.placements();
        let before = evaluate_schedule(&placements, &inst, SetupMode::SequenceDependent).unwrap();
        let mut raised = inst.clone();
        for row in raised.timing.setup.values_mut() {
            if let Some(cell) = row.values_mut().next().and_then(|m| m.values_mut().next()) {
                *cell += 4.0;
            }
        }
        let after = evaluate_schedule(&placements, &raised, SetupMode::SequenceDependent).unwrap();
        // A later completion can drop a predecessor, see the test below.
        if derive_successors(&before, &inst).unwrap() != derive_successors(&after, &raised).unwrap() {
            continue;
        }
        checked += 1;
        assert!(after.makespan >= before.makespan, "seed {seed}");
        for e in &before.entries {
            assert!(after.entry(&e.job).unwrap().completion >= e.completion);
        }
    }
    assert!(checked >= 25, "only {checked} seeds kept their successors");
}

#[test]
fn longer_setup_can_drop_a_costly_predecessor() {
    let inst = random_small_instance(19, 5, 2, 5, 30);
    let placements = solve_baseline(&inst).unwrap().schedule.placements();
    let before = evaluate_schedule(&placements, &inst, SetupMode::SequenceDependent).unwrap();
    assert_eq!(before.makespan, 12.0);
    let mut raised = inst.clone();
    *raised.timing.setup.get_mut("0").unwrap().get_mut("J1").unwrap().get_mut("M1").unwrap() += 4.0;
    let after = evaluate_schedule(&placements, &raised, SetupMode::SequenceDependent).unwrap();
    // J1 now completes after J2 starts, so J2 pays the dummy setup 3 instead of 5.
    assert_eq!(after.entry("J1").unwrap().completion, 6.0);
    assert_eq!(after.makespan, 10.0);
}

#[test]
fn job_only_timing_dominates_sequence_dependent() {
    for seed in 0..50 {
        let inst = random_small_instance(seed, 5, 2, 5, 30);
        let placements = solve_greedy(&inst).unwrap().schedule.placements();
        let seq = evaluate_schedule(&placements, &inst, SetupMode::SequenceDependent).unwrap();
        let job = evaluate_schedule(&placements, &inst, SetupMode::JobOnly).unwrap();
        for e in &seq.entries {
            assert!(job.entry(&e.job).unwrap().completion >= e.completion);
        }
    }
}

#[test]
fn fixed_point_converges_within_job_count() {
    for seed in 0..100 {
        let inst = random_small_instance(seed, 5, 3, 5, 30);
        for s in schedules(&inst) {
            let (_, passes) =
                evaluate_schedule_traced(&s.placements(), &inst, SetupMode::SequenceDependent).unwrap();
            assert!(passes <= inst.jobs.len().max(1), "seed {seed}");
            assert!(validate_schedule(&s, &inst).is_empty());
        }
    }
}
