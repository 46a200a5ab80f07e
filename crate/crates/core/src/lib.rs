//! Batch scheduling of quantum-circuit jobs on clusters of heterogeneous QPUs.
//!
//! The crate is organised around a small set of pure building blocks:
//!
//! - [`model`]: jobs, machines, timing tables, schedules, the successor
//!   relation and the schedule evaluator.
//! - [`cutter`]: greedy width-based resizing of circuits that fit no device.
//! - [`timing`]: seeded synthetic processing and setup times.
//! - [`milp`]: the time-indexed MILP (extended and simple variants), LP file
//!   output, solution parsing and schedule extraction.
//! - [`solvers`]: first-fit-decreasing baseline, MILP strategies through an
//!   external solver process, an exhaustive oracle and a greedy fallback.
//! - [`bench`]: random batches, the two reference hardware scenarios,
//!   improvement statistics and Gantt rendering.
//!
//! Data-parallel loops (oracle enumeration, batch sweeps) run on rayon when
//! the `parallel` feature is enabled and fall back to plain iterators
//! otherwise; see [`par`].

pub mod bench;
pub mod cutter;
pub mod gantt;
pub mod milp;
pub mod model;
pub mod par;
pub mod solvers;
pub mod timing;

pub use model::{
    CircuitJob, Instance, Machine, Placement, Schedule, ScheduleEntry, SetupMode, SuccessorMap,
    TimeMode, TimingTables,
};
