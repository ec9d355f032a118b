//! Scheduling policies and the contract the engines drive them through.
//!
//! Job-level policies implement [`TracePolicy`] and run in the trace engine.
//! Policies that only look at per-stream queue lengths implement
//! [`QueuePolicy`] and can also run in the CTMC engine.

mod edf;
mod fap_runtime;
mod index;
mod redf;
mod robust;

pub use edf::{edf_select, Edf};
pub use fap_runtime::{FractionalShares, WeightedRoundRobin};
pub use index::IndexPolicy;
pub use redf::{edf_feasible, redf_admit, redf_resurrect, Redf};
pub use robust::{Knowledge, PhaseKind, PhaseRecord, Robust};

use crate::workload::{Job, StreamSpec};

/// Index of a job in arrival order within one run.
pub type JobId = usize;

/// What the processor does until the next event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decision {
    Idle,
    /// Run `job`; `until` asks the engine for a decision point at that time
    /// even if nothing else happens (time slices, phase boundaries).
    Run { job: JobId, until: Option<f64> },
}

impl Decision {
    pub fn job(&self) -> Option<JobId> {
        match self {
            Decision::Idle => None,
            Decision::Run { job, .. } => Some(*job),
        }
    }
}

/// Jobs released so far. `active` jobs compete for the processor; `parked`
/// jobs were set aside by admission control and may be brought back.
/// No job in either list has a deadline at or before `now` once the engine
/// has swept expiries.
#[derive(Debug, Clone, Default)]
pub struct PendingSet {
    now: f64,
    jobs: Vec<Job>,
    active: Vec<JobId>,
    parked: Vec<JobId>,
    lengths: Vec<usize>,
}

impl PendingSet {
    pub fn new(n_streams: usize) -> Self {
        Self { lengths: vec![0; n_streams], ..Self::default() }
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn set_now(&mut self, now: f64) {
        debug_assert!(now >= self.now);
        self.now = now;
    }

    /// Releases `job` into the active list.
    pub fn insert(&mut self, job: Job) -> JobId {
        let id = self.jobs.len();
        if job.stream >= self.lengths.len() {
            self.lengths.resize(job.stream + 1, 0);
        }
        self.lengths[job.stream] += 1;
        self.jobs.push(job);
        self.active.push(id);
        id
    }

    pub fn job(&self, id: JobId) -> &Job {
        &self.jobs[id]
    }

    pub(crate) fn job_mut(&mut self, id: JobId) -> &mut Job {
        &mut self.jobs[id]
    }

    pub fn active(&self) -> &[JobId] {
        &self.active
    }

    pub fn parked(&self) -> &[JobId] {
        &self.parked
    }

    pub fn is_active(&self, id: JobId) -> bool {
        self.active.contains(&id)
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    /// Active jobs per stream.
    pub fn queue_lengths(&self) -> &[usize] {
        &self.lengths
    }

    /// Oldest active job of `stream`.
    pub fn head_of(&self, stream: usize) -> Option<JobId> {
        self.active.iter().copied().filter(|&id| self.jobs[id].stream == stream).min()
    }

    /// Moves an active job to the parked list.
    pub fn park(&mut self, id: JobId) {
        if let Some(pos) = self.active.iter().position(|&x| x == id) {
            self.active.swap_remove(pos);
            self.lengths[self.jobs[id].stream] -= 1;
            self.parked.push(id);
        }
    }

    /// Moves a parked job back to the active list.
    pub fn unpark(&mut self, id: JobId) {
        if let Some(pos) = self.parked.iter().position(|&x| x == id) {
            self.parked.swap_remove(pos);
            self.lengths[self.jobs[id].stream] += 1;
            self.active.push(id);
        }
    }

    /// Removes a job from whichever list holds it.
    pub fn remove(&mut self, id: JobId) {
        if let Some(pos) = self.active.iter().position(|&x| x == id) {
            self.active.swap_remove(pos);
            self.lengths[self.jobs[id].stream] -= 1;
        } else if let Some(pos) = self.parked.iter().position(|&x| x == id) {
            self.parked.swap_remove(pos);
        }
    }

    /// Removes every job whose deadline is at or before `now`, returning them
    /// in id order.
    pub fn expire(&mut self) -> Vec<JobId> {
        let now = self.now;
        let mut dead: Vec<JobId> = self
            .active
            .iter()
            .chain(&self.parked)
            .copied()
            .filter(|&id| self.jobs[id].deadline_abs <= now)
            .collect();
        dead.sort_unstable();
        for &id in &dead {
            self.remove(id);
        }
        dead
    }

    /// Earliest deadline among active and parked jobs.
    pub fn next_deadline(&self) -> Option<f64> {
        self.active
            .iter()
            .chain(&self.parked)
            .map(|&id| self.jobs[id].deadline_abs)
            .min_by(f64::total_cmp)
    }

    /// Processor time already given to `id`.
    pub fn work_done(&self, id: JobId) -> f64 {
        let j = &self.jobs[id];
        j.exec_total - j.exec_remaining
    }
}

/// A job-level scheduling policy driven by the trace engine.
pub trait TracePolicy {
    fn name(&self) -> &str;

    /// Called after `job` has been inserted into the active list.
    fn on_arrival(&mut self, _pending: &mut PendingSet, _job: JobId) {}

    /// Called after `job` completed and left the pending set.
    fn on_completion(&mut self, _pending: &mut PendingSet, _job: JobId) {}

    /// Chooses what runs next. `running` is the job that held the processor
    /// up to now, if it is still active.
    fn decide(&mut self, pending: &mut PendingSet, running: Option<JobId>) -> Decision;
}

/// A policy that only looks at queue lengths, usable by the CTMC engine.
pub trait QueuePolicy: Sync {
    /// Fills `rates[i]` with the processor share stream `i` receives given
    /// `lengths`. Shares of empty queues must be zero.
    fn shares(&self, lengths: &[usize], rates: &mut [f64]);
}

impl QueuePolicy for crate::policyz::PriorityTable {
    fn shares(&self, lengths: &[usize], rates: &mut [f64]) {
        rates.fill(0.0);
        if let Some(i) = self.select(lengths) {
            rates[i] = 1.0;
        }
    }
}

/// Mean execution time per stream.
pub(crate) fn mean_execs(streams: &[StreamSpec]) -> Vec<f64> {
    streams.iter().map(StreamSpec::mean_exec).collect()
}
