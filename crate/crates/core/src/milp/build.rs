use std::collections::{BTreeMap, HashSet};

use super::{
    BuildError, Constraint, Family, MilpModel, ModelMode, ModelStats, Sense, VarFamily, VarIndex,
    Variable,
};
use crate::model::{validate_instance, Indexed, Instance, InstanceViolation, TimeMode, EPS};

/// Replaces every character outside `[A-Za-z0-9_.]` with `_`.
pub(crate) fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn to_slots(value: f64, granularity: f64) -> f64 {
    (value / granularity - EPS).ceil().max(0.0)
}

/// Copy of the instance with every time divided by the granularity and
/// rounded up, so that one slot is one time unit. This is exactly the
/// instance the MILP encodes.
pub fn slot_instance(instance: &Instance) -> Instance {
    let g = instance.granularity;
    let mut out = instance.clone();
    out.granularity = 1.0;
    out.time_mode = TimeMode::Integer;
    for row in out.timing.processing.values_mut() {
        for v in row.values_mut() {
            *v = to_slots(*v, g).max(1.0);
        }
    }
    for by_job in out.timing.setup.values_mut() {
        for row in by_job.values_mut() {
            for v in row.values_mut() {
                *v = to_slots(*v, g);
            }
        }
    }
    out
}

struct Builder {
    variables: Vec<Variable>,
    names: HashSet<String>,
    constraints: Vec<Constraint>,
}

impl Builder {
    fn var(&mut self, name: String, family: VarFamily) -> Result<usize, BuildError> {
        if !self.names.insert(name.clone()) {
            return Err(BuildError::NameCollision(name));
        }
        self.variables.push(Variable {
            name,
            family,
            upper: None,
        });
        Ok(self.variables.len() - 1)
    }

    fn row(&mut self, name: String, family: Family, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        let terms: Vec<(usize, f64)> = terms.into_iter().filter(|&(_, a)| a != 0.0).collect();
        let trivial = match sense {
            Sense::Le => rhs >= 0.0,
            Sense::Ge => rhs <= 0.0,
            Sense::Eq => rhs == 0.0,
        };
        if terms.is_empty() && trivial {
            return;
        }
        self.constraints.push(Constraint {
            name,
            family,
            terms,
            sense,
            rhs,
        });
    }
}

struct Names {
    jobs: Vec<String>,
    machines: Vec<String>,
}

impl Names {
    /// `p` is 0 for the dummy job.
    fn pred(&self, p: usize) -> &str {
        if p == 0 {
            "0"
        } else {
            &self.jobs[p - 1]
        }
    }
}

fn prepare(instance: &Instance) -> Result<(Indexed, Names), BuildError> {
    let mut violations = Vec::new();
    for v in validate_instance(instance) {
        match v {
            InstanceViolation::TMaxBelowBound { t_max, bound } => {
                return Err(BuildError::TMaxTooSmall { t_max, bound })
            }
            other => violations.push(other.to_string()),
        }
    }
    if !violations.is_empty() {
        return Err(BuildError::InvalidInstance(violations));
    }
    let ix = slot_instance(instance).indexed()?;
    let names = Names {
        jobs: instance.jobs.iter().map(|j| sanitize(&j.id)).collect(),
        machines: instance.machines.iter().map(|m| sanitize(&m.id)).collect(),
    };
    Ok((ix, names))
}

/// Extended model: sequence-dependent setups, exact for the evaluator's
/// successor relation and max-combined setups.
pub fn build_extended(instance: &Instance) -> Result<MilpModel, BuildError> {
    build(instance, ModelMode::Extended)
}

/// Simple model: job-only setups `s_jm = max_i s_ijm`, no successor variables.
pub fn build_simple(instance: &Instance) -> Result<MilpModel, BuildError> {
    build(instance, ModelMode::Simple)
}

fn build(instance: &Instance, mode: ModelMode) -> Result<MilpModel, BuildError> {
    let (ix, names) = prepare(instance)?;
    let n = ix.n;
    let m = ix.m;
    let slots = instance.t_max as usize + 1;
    let big_m = instance.big_m;
    let extended = mode == ModelMode::Extended;
    let mut bld = Builder {
        variables: Vec::new(),
        names: HashSet::new(),
        constraints: Vec::new(),
    };
    let mut index = VarIndex {
        n,
        m,
        slots,
        ..VarIndex::default()
    };
    let jn = &names.jobs;
    let mn = &names.machines;

    // Variables.
    for j in 0..n {
        for k in 0..m {
            index.x.push(bld.var(format!("x_{}_{}", jn[j], mn[k]), VarFamily::X)?);
        }
    }
    if extended {
        for p in 0..=n {
            for j in 0..n {
                for k in 0..m {
                    let v = bld.var(format!("y_{}_{}_{}", names.pred(p), jn[j], mn[k]), VarFamily::Y)?;
                    index.y.push(Some(v));
                }
            }
        }
    }
    for j in 0..n {
        for k in 0..m {
            for t in 0..slots {
                index
                    .z
                    .push(bld.var(format!("z_{}_{}_{}", jn[j], mn[k], t), VarFamily::Z)?);
            }
        }
    }
    if extended {
        for (family, prefix) in [(VarFamily::Alpha, "alpha"), (VarFamily::Beta, "beta")] {
            let mut slot = vec![None; n * n];
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        slot[i * n + j] = Some(bld.var(format!("{prefix}_{}_{}", jn[i], jn[j]), family)?);
                    }
                }
            }
            match family {
                VarFamily::Alpha => index.alpha = slot,
                _ => index.beta = slot,
            }
        }
        index.gamma = vec![None; n * n * m];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for k in 0..m {
                    index.gamma[(i * n + j) * m + k] = Some(bld.var(
                        format!("gamma_{}_{}_{}", jn[i], jn[j], mn[k]),
                        VarFamily::Gamma,
                    )?);
                }
            }
        }
        index.delta = vec![None; n * n * n * m];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for kk in 0..n {
                    for k in 0..m {
                        let v = bld.var(
                            format!("delta_{}_{}_{}_{}", jn[i], jn[j], jn[kk], mn[k]),
                            VarFamily::Delta,
                        )?;
                        if kk == i || kk == j {
                            bld.variables[v].upper = Some(0.0);
                        }
                        index.delta[((i * n + j) * n + kk) * m + k] = Some(v);
                    }
                }
            }
        }
    }
    for j in 0..n {
        index.c.push(bld.var(format!("c_{}", jn[j]), VarFamily::Completion)?);
    }
    for j in 0..n {
        index.b.push(bld.var(format!("b_{}", jn[j]), VarFamily::Start)?);
    }
    index.c_max = bld.var("c_max".into(), VarFamily::Makespan)?;
    if n > 0 {
        index.c0 = Some(bld.var("c_0".into(), VarFamily::DummyCompletion)?);
    }
    if extended {
        for j in 0..n {
            index
                .sigma
                .push(Some(bld.var(format!("sigma_{}", jn[j]), VarFamily::Setup)?));
        }
        index.w = vec![None; (n + 1) * n * m];
        for p in 0..=n {
            for j in 0..n {
                if p == j + 1 {
                    continue;
                }
                for k in 0..m {
                    index.w[(p * n + j) * m + k] = Some(bld.var(
                        format!("w_{}_{}_{}", names.pred(p), jn[j], mn[k]),
                        VarFamily::SetupSelect,
                    )?);
                }
            }
        }
    }

    // Constraints. Indices in names are 1-based for jobs and machines,
    // 0-based for slots; predecessor index 0 is the dummy job.
    let x = |j: usize, k: usize| index.x(j, k);
    let z = |j: usize, k: usize, t: usize| index.z(j, k, t);
    let y = |p: usize, j: usize, k: usize| index.y(p, j, k).unwrap();
    let alpha = |i: usize, j: usize| index.alpha(i, j).unwrap();
    let beta = |i: usize, j: usize| index.beta(i, j).unwrap();
    let gamma = |i: usize, j: usize, k: usize| index.gamma(i, j, k).unwrap();
    let delta = |i: usize, j: usize, kk: usize, k: usize| index.delta(i, j, kk, k).unwrap();
    let c = |j: usize| index.c[j];
    let b = |j: usize| index.b[j];
    // Completion of a predecessor index (0 = dummy).
    let cp = |p: usize| if p == 0 { index.c0.unwrap() } else { index.c[p - 1] };
    let c_max = index.c_max;
    let agg = ix.aggregated_setup();
    let count_m = big_m.max((n + 1) as f64);

    for j in 0..n {
        bld.row(format!("C1_j{}", j + 1), Family::C1, vec![(c_max, 1.0), (c(j), -1.0)], Sense::Ge, 0.0);
    }
    if let Some(c0) = index.c0 {
        bld.row("C2".into(), Family::C2, vec![(c0, 1.0)], Sense::Eq, 0.0);
    }
    for j in 0..n {
        let terms = (0..m).map(|k| (x(j, k), 1.0)).collect();
        bld.row(format!("C3_j{}", j + 1), Family::C3, terms, Sense::Eq, 1.0);
    }
    for j in 0..n {
        for t in 0..slots {
            let terms = (0..m).map(|k| (z(j, k, t), 1.0)).collect();
            bld.row(format!("C4_j{}_t{}", j + 1, t), Family::C4, terms, Sense::Le, 1.0);
        }
    }
    for j in 0..n {
        let mut terms = vec![(c(j), 1.0), (b(j), -1.0)];
        if extended {
            terms.extend((0..m).map(|k| (x(j, k), -ix.processing(j, k))));
            terms.push((index.sigma(j).unwrap(), -1.0));
            bld.row(format!("C5_j{}", j + 1), Family::C5, terms, Sense::Eq, 0.0);
        } else {
            terms.extend((0..m).map(|k| (x(j, k), -(ix.processing(j, k) + agg[j * m + k]))));
            bld.row(format!("C5_j{}", j + 1), Family::C5, terms, Sense::Ge, 0.0);
        }
    }
    if extended {
        for j in 0..n {
            let sigma = index.sigma(j).unwrap();
            for p in 0..=n {
                if p == j + 1 {
                    continue;
                }
                let mut terms = vec![(sigma, 1.0)];
                terms.extend((0..m).map(|k| (y(p, j, k), -ix.setup(p, j, k))));
                bld.row(format!("C5s_i{}_j{}", p, j + 1), Family::C5Setup, terms, Sense::Ge, 0.0);
            }
            for p in 0..=n {
                if p == j + 1 {
                    continue;
                }
                for k in 0..m {
                    let w = index.w(p, j, k).unwrap();
                    bld.row(
                        format!("C5w_i{}_j{}_m{}", p, j + 1, k + 1),
                        Family::C5Select,
                        vec![(sigma, 1.0), (y(p, j, k), -ix.setup(p, j, k)), (w, big_m)],
                        Sense::Le,
                        big_m,
                    );
                }
            }
            let terms = (0..=n)
                .filter(|&p| p != j + 1)
                .flat_map(|p| (0..m).map(move |k| (p, k)))
                .map(|(p, k)| (index.w(p, j, k).unwrap(), 1.0))
                .collect();
            bld.row(format!("C5u_j{}", j + 1), Family::C5One, terms, Sense::Eq, 1.0);
        }
        // C6 runs over every i in J∪{0}, including i = j, which rules out
        // self-succession.
        for p in 0..=n {
            for j in 0..n {
                let mut terms = vec![(b(j), 1.0), (cp(p), -1.0)];
                terms.extend((0..m).map(|k| (y(p, j, k), -big_m)));
                bld.row(format!("C6_i{}_j{}", p, j + 1), Family::C6, terms, Sense::Ge, -big_m);
            }
        }
    }
    for j in 0..n {
        let mut terms: Vec<(usize, f64)> = (0..m)
            .flat_map(|k| (0..slots).map(move |t| (k, t)))
            .map(|(k, t)| (z(j, k, t), 1.0))
            .collect();
        terms.push((c(j), -1.0));
        terms.push((b(j), 1.0));
        bld.row(format!("C7_j{}", j + 1), Family::C7, terms, Sense::Eq, 0.0);
    }
    for j in 0..n {
        for k in 0..m {
            let mut terms: Vec<(usize, f64)> = (0..slots).map(|t| (z(j, k, t), 1.0)).collect();
            terms.push((x(j, k), -big_m));
            bld.row(format!("C8_j{}_m{}", j + 1, k + 1), Family::C8, terms, Sense::Le, 0.0);
        }
    }
    for j in 0..n {
        for t in 0..slots {
            let mut terms = vec![(c(j), 1.0)];
            terms.extend((0..m).map(|k| (z(j, k, t), -((t + 1) as f64))));
            bld.row(format!("C9_j{}_t{}", j + 1, t), Family::C9, terms, Sense::Ge, 0.0);
        }
    }
    for j in 0..n {
        for t in 0..slots {
            let mut terms = vec![(b(j), 1.0)];
            terms.extend((0..m).map(|k| (z(j, k, t), big_m - t as f64)));
            bld.row(format!("C10_j{}_t{}", j + 1, t), Family::C10, terms, Sense::Le, big_m);
        }
    }
    for k in 0..m {
        for t in 0..slots {
            let terms = (0..n).map(|j| (z(j, k, t), ix.qubits[j] as f64)).collect();
            bld.row(
                format!("C11_m{}_t{}", k + 1, t),
                Family::C11,
                terms,
                Sense::Le,
                ix.capacity[k] as f64,
            );
        }
    }
    // Valid inequalities: they cut no integer schedule but lift the LP bound.
    for k in (0..m).filter(|_| n > 0) {
        let slots_on = |j: usize| (0..slots).map(move |t| (z(j, k, t), 1.0));
        let mut terms: Vec<(usize, f64)> = (0..n)
            .flat_map(|j| {
                let q = ix.qubits[j] as f64;
                slots_on(j).map(move |(v, _)| (v, q))
            })
            .collect();
        terms.push((c_max, -(ix.capacity[k] as f64)));
        bld.row(format!("K1_m{}", k + 1), Family::K1, terms, Sense::Le, 0.0);
        let wide: Vec<usize> = (0..n).filter(|&j| 2 * ix.qubits[j] > ix.capacity[k]).collect();
        if !wide.is_empty() {
            let mut terms: Vec<(usize, f64)> = wide.iter().flat_map(|&j| slots_on(j)).collect();
            terms.push((c_max, -1.0));
            bld.row(format!("K2_m{}", k + 1), Family::K2, terms, Sense::Le, 0.0);
        }
    }
    if extended {
        for j in 0..n {
            let terms = (0..=n)
                .flat_map(|p| (0..m).map(move |k| (p, k)))
                .map(|(p, k)| (y(p, j, k), 1.0))
                .collect();
            bld.row(format!("C12_j{}", j + 1), Family::C12, terms, Sense::Ge, 1.0);
        }
        for j in 0..n {
            for k in 0..m {
                let mut terms: Vec<(usize, f64)> = (0..=n).map(|p| (y(p, j, k), 1.0)).collect();
                terms.push((x(j, k), -count_m));
                bld.row(format!("C13_j{}_m{}", j + 1, k + 1), Family::C13, terms, Sense::Le, 0.0);
            }
        }
        for j in 0..n {
            for k in 0..m {
                let mut terms: Vec<(usize, f64)> = (0..n).map(|i| (y(j + 1, i, k), 1.0)).collect();
                terms.push((x(j, k), -count_m));
                bld.row(format!("C14_j{}_m{}", j + 1, k + 1), Family::C14, terms, Sense::Le, 0.0);
            }
        }
        for j in 0..n {
            for k in 0..m {
                bld.row(
                    format!("C15_j{}_m{}", j + 1, k + 1),
                    Family::C15,
                    vec![(z(j, k, 0), 1.0), (y(0, j, k), -1.0)],
                    Sense::Le,
                    0.0,
                );
            }
        }
        for j in 0..n {
            for kk in 0..n {
                if kk == j {
                    continue;
                }
                for k in 0..m {
                    bld.row(
                        format!("C15d_j{}_k{}_m{}", j + 1, kk + 1, k + 1),
                        Family::C15Dummy,
                        vec![(y(0, j, k), 1.0), (gamma(kk, j, k), 1.0), (alpha(kk, j), 1.0)],
                        Sense::Le,
                        2.0,
                    );
                }
            }
        }
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .collect();
        for &(i, j) in &pairs {
            bld.row(
                format!("C16_i{}_j{}", i + 1, j + 1),
                Family::C16,
                vec![(alpha(i, j), big_m), (b(j), -1.0), (c(i), 1.0)],
                Sense::Ge,
                1.0,
            );
        }
        for &(i, j) in &pairs {
            bld.row(
                format!("C16u_i{}_j{}", i + 1, j + 1),
                Family::C16Upper,
                vec![(b(j), 1.0), (c(i), -1.0), (alpha(i, j), -big_m)],
                Sense::Ge,
                -big_m,
            );
        }
        for &(i, j) in &pairs {
            bld.row(
                format!("C17_i{}_j{}", i + 1, j + 1),
                Family::C17,
                vec![(beta(i, j), big_m), (c(j), -1.0), (c(i), 1.0)],
                Sense::Ge,
                0.0,
            );
        }
        for &(i, j) in &pairs {
            bld.row(
                format!("C17u_i{}_j{}", i + 1, j + 1),
                Family::C17Upper,
                vec![(c(j), 1.0), (c(i), -1.0), (beta(i, j), -big_m)],
                Sense::Ge,
                1.0 - big_m,
            );
        }
        for &(i, j) in &pairs {
            for k in 0..m {
                bld.row(
                    format!("C18_i{}_j{}_m{}", i + 1, j + 1, k + 1),
                    Family::C18,
                    vec![(gamma(i, j, k), 1.0), (x(i, k), -1.0), (x(j, k), -1.0)],
                    Sense::Ge,
                    -1.0,
                );
            }
        }
        // delta_ijkm with k in {i, j} is fixed to 0 through its bound.
        let triples: Vec<(usize, usize, usize)> = pairs
            .iter()
            .flat_map(|&(i, j)| (0..n).map(move |kk| (i, j, kk)))
            .filter(|&(i, j, kk)| kk != i && kk != j)
            .collect();
        for &(i, j, kk) in &triples {
            for k in 0..m {
                bld.row(
                    format!("C19_i{}_j{}_k{}_m{}", i + 1, j + 1, kk + 1, k + 1),
                    Family::C19,
                    vec![
                        (delta(i, j, kk, k), 1.0),
                        (alpha(kk, j), -1.0),
                        (beta(i, kk), -1.0),
                        (gamma(i, j, k), -1.0),
                        (gamma(i, kk, k), -1.0),
                    ],
                    Sense::Ge,
                    -3.0,
                );
            }
        }
        for &(i, j, kk) in &triples {
            for k in 0..m {
                bld.row(
                    format!("C19u_i{}_j{}_k{}_m{}", i + 1, j + 1, kk + 1, k + 1),
                    Family::C19Upper,
                    vec![
                        (delta(i, j, kk, k), 3.0),
                        (x(kk, k), -1.0),
                        (beta(i, kk), -1.0),
                        (alpha(kk, j), -1.0),
                    ],
                    Sense::Le,
                    0.0,
                );
            }
        }
        for &(i, j) in &pairs {
            for k in 0..m {
                let mut terms = vec![(y(i + 1, j, k), 1.0), (alpha(i, j), -1.0), (gamma(i, j, k), -1.0)];
                terms.extend(
                    (0..n)
                        .filter(|&kk| kk != i && kk != j)
                        .map(|kk| (delta(i, j, kk, k), 1.0)),
                );
                bld.row(
                    format!("C20_i{}_j{}_m{}", i + 1, j + 1, k + 1),
                    Family::C20,
                    terms,
                    Sense::Ge,
                    -1.0,
                );
            }
        }
        if n > 2 {
            let others = (n - 2) as f64;
            for &(i, j) in &pairs {
                for k in 0..m {
                    let mut terms = vec![(y(i + 1, j, k), others)];
                    terms.extend(
                        (0..n)
                            .filter(|&kk| kk != i && kk != j)
                            .map(|kk| (delta(i, j, kk, k), 1.0)),
                    );
                    bld.row(
                        format!("C20f_i{}_j{}_m{}", i + 1, j + 1, k + 1),
                        Family::C20Forbid,
                        terms,
                        Sense::Le,
                        others,
                    );
                }
            }
        }
    }

    let stats = stats_of(&bld.variables, &bld.constraints);
    Ok(MilpModel {
        mode,
        objective: vec![(c_max, 1.0)],
        variables: bld.variables,
        constraints: bld.constraints,
        stats,
        index,
    })
}

fn var_family_label(f: VarFamily) -> &'static str {
    match f {
        VarFamily::X => "x",
        VarFamily::Y => "y",
        VarFamily::Z => "z",
        VarFamily::Alpha => "alpha",
        VarFamily::Beta => "beta",
        VarFamily::Gamma => "gamma",
        VarFamily::Delta => "delta",
        VarFamily::Completion => "c",
        VarFamily::Start => "b",
        VarFamily::Makespan => "c_max",
        VarFamily::DummyCompletion => "c_0",
        VarFamily::Setup => "sigma",
        VarFamily::SetupSelect => "w",
    }
}

fn stats_of(variables: &[Variable], constraints: &[Constraint]) -> ModelStats {
    let mut variables_by_family = BTreeMap::new();
    for v in variables {
        *variables_by_family
            .entry(var_family_label(v.family).to_string())
            .or_insert(0) += 1;
    }
    let mut constraints_by_family = BTreeMap::new();
    for c in constraints {
        *constraints_by_family.entry(c.family.label().to_string()).or_insert(0) += 1;
    }
    ModelStats {
        num_variables: variables.len(),
        num_constraints: constraints.len(),
        variables_by_family,
        constraints_by_family,
    }
}
