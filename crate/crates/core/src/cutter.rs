//! Greedy width-based circuit resizing.
//!
//! A circuit wider than every machine is split into fragments of the largest
//! machine capacity plus a remainder. Every fragment is then emitted once per
//! cut variant so that the downstream reconstruction can regroup results; the
//! cut manifest records which emitted job belongs to which circuit, fragment
//! and variant. Fragment depth equals the parent depth.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CircuitJob, JobOrigin, Machine};

pub const DEFAULT_VARIANTS_PER_CUT: u32 = 4;
pub const DEFAULT_JOB_CAP: usize = 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CutError {
    #[error("circuit {circuit} expands to more than {cap} jobs")]
    ExpansionTooLarge { circuit: String, cap: usize },
    #[error("no machine capacities given")]
    NoMachines,
    #[error("circuit {0} has zero width or depth")]
    EmptyCircuit(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub id: String,
    pub width: u32,
    pub depth: u32,
}

impl CircuitSpec {
    pub fn new(id: impl Into<String>, width: u32, depth: u32) -> Self {
        Self {
            id: id.into(),
            width,
            depth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutPlan {
    pub circuit: String,
    pub fragments: Vec<u32>,
    pub cut_count: u32,
    pub variants_per_cut: u32,
}

impl CutPlan {
    /// `|fragments| · variants_per_cut^cut_count`, or `None` on overflow.
    pub fn expanded_len(&self) -> Option<usize> {
        if self.cut_count == 0 {
            return Some(1);
        }
        let copies = (self.variants_per_cut as usize).checked_pow(self.cut_count)?;
        copies.checked_mul(self.fragments.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub job_id: String,
    pub fragment_index: usize,
    pub variant_index: usize,
    pub width: u32,
}

/// Circuit id to the jobs emitted for it.
pub type CutManifest = BTreeMap<String, Vec<ManifestEntry>>;

/// Splits a circuit into device-sized fragments, largest first.
pub fn plan_cut(
    circuit: &CircuitSpec,
    capacities: &[u32],
    variants_per_cut: u32,
) -> Result<CutPlan, CutError> {
    let largest = capacities.iter().copied().max().ok_or(CutError::NoMachines)?;
    if largest == 0 {
        return Err(CutError::NoMachines);
    }
    let mut fragments = Vec::new();
    let mut remainder = circuit.width;
    while remainder > largest {
        fragments.push(largest);
        remainder -= largest;
    }
    fragments.push(remainder);
    Ok(CutPlan {
        circuit: circuit.id.clone(),
        cut_count: fragments.len() as u32 - 1,
        fragments,
        variants_per_cut: variants_per_cut.max(1),
    })
}

/// Emits the sub-jobs of a plan. An uncut circuit becomes a single job with
/// the circuit's own id; otherwise every fragment is emitted
/// `variants_per_cut^cut_count` times with ids `<circuit>_f<i>_v<k>`.
pub fn expand_subjobs(plan: &CutPlan, depth: u32, cap: usize) -> Result<Vec<CircuitJob>, CutError> {
    let total = plan
        .expanded_len()
        .filter(|&t| t <= cap)
        .ok_or_else(|| CutError::ExpansionTooLarge {
            circuit: plan.circuit.clone(),
            cap,
        })?;
    if plan.cut_count == 0 {
        return Ok(vec![CircuitJob::new(plan.circuit.clone(), plan.fragments[0], depth)]);
    }
    let copies = total / plan.fragments.len();
    let mut jobs = Vec::with_capacity(total);
    for (f, &width) in plan.fragments.iter().enumerate() {
        for v in 0..copies {
            jobs.push(CircuitJob {
                id: format!("{}_f{}_v{}", plan.circuit, f, v),
                qubits: width,
                depth,
                origin: Some(JobOrigin {
                    parent: plan.circuit.clone(),
                    fragment: f,
                    variant: v,
                }),
            });
        }
    }
    Ok(jobs)
}

/// Resizes a batch of circuits against the given machines. Jobs keep circuit
/// order; the manifest maps each circuit to its emitted jobs.
pub fn resize_batch(
    circuits: &[CircuitSpec],
    machines: &[Machine],
    variants_per_cut: u32,
    cap: usize,
) -> Result<(Vec<CircuitJob>, CutManifest), CutError> {
    let capacities: Vec<u32> = machines.iter().map(|m| m.capacity).collect();
    let mut jobs = Vec::new();
    let mut manifest = CutManifest::new();
    for circuit in circuits {
        if circuit.width == 0 || circuit.depth == 0 {
            return Err(CutError::EmptyCircuit(circuit.id.clone()));
        }
        let plan = plan_cut(circuit, &capacities, variants_per_cut)?;
        let sub = expand_subjobs(&plan, circuit.depth, cap)?;
        let entries = manifest.entry(circuit.id.clone()).or_default();
        for job in &sub {
            let (fragment_index, variant_index) = job
                .origin
                .as_ref()
                .map_or((0, 0), |o| (o.fragment, o.variant));
            entries.push(ManifestEntry {
                job_id: job.id.clone(),
                fragment_index,
                variant_index,
                width: job.qubits,
            });
        }
        jobs.extend(sub);
    }
    Ok((jobs, manifest))
}
