//! ROBUST overload scheduler.
//!
//! Time is cut into alternating phases. An odd phase starts by picking the
//! longest eligible job and runs it without preemption until it terminates;
//! the odd phase lasts as long as that job's remaining execution. The even
//! phase that follows lasts `1 / (slack - 1)` of the odd phase and always
//! runs the longest job, preempting it when a longer one arrives.
//!
//! Interpretation choices:
//! * A job is eligible when its (estimated) remaining execution still fits
//!   before its deadline. If no job is eligible the longest job runs as
//!   preemptible filler without opening a phase, so the processor never
//!   idles with work pending and never commits to a job known to be late.
//! * With nothing pending the phase machine resets; the next job starts a
//!   fresh odd phase.
//! * An even phase whose timer fires with jobs pending hands over to the
//!   next odd phase immediately.
//! * With [`Knowledge::Mean`] the scheduler sees only the stream's mean
//!   execution time, which stands in for the job's total length: remaining
//!   length is estimated as `mean - work_done` (floored at zero) for
//!   ranking, eligibility and phase lengths, while the job still needs its
//!   true execution time to complete.

use serde::{Deserialize, Serialize};

use super::{mean_execs, Decision, JobId, PendingSet, TracePolicy};
use crate::error::{Error, Result};
use crate::workload::StreamSpec;

/// What the scheduler knows about execution requirements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Knowledge {
    Exact,
    Mean,
}

impl std::str::FromStr for Knowledge {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "mean" => Ok(Self::Mean),
            other => Err(Error::InvalidParameter(format!("unknown knowledge mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    Odd,
    Even,
}

/// One phase as it was planned and as it ended.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRecord {
    pub kind: PhaseKind,
    pub start: f64,
    pub planned: f64,
    pub end: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Idle,
    Odd { job: JobId, planned: f64 },
    Even { end: f64 },
}

#[derive(Debug, Clone)]
pub struct Robust {
    slack: f64,
    knowledge: Knowledge,
    means: Vec<f64>,
    phase: Phase,
    record: bool,
    phases: Vec<PhaseRecord>,
}

impl Robust {
    pub fn new(streams: &[StreamSpec], slack: f64, knowledge: Knowledge) -> Result<Self> {
        if !(slack > 1.0 && slack.is_finite()) {
            return Err(Error::InvalidParameter(format!("ROBUST slack must exceed 1, got {slack}")));
        }
        Ok(Self {
            slack,
            knowledge,
            means: mean_execs(streams),
            phase: Phase::Idle,
            record: false,
            phases: Vec::new(),
        })
    }

    /// Keep a log of every phase.
    pub fn recording(mut self) -> Self {
        self.record = true;
        self
    }

    pub fn phases(&self) -> &[PhaseRecord] {
        &self.phases
    }

    pub fn slack(&self) -> f64 {
        self.slack
    }

    pub fn knowledge(&self) -> Knowledge {
        self.knowledge
    }

    fn estimate(&self, p: &PendingSet, id: JobId) -> f64 {
        let j = p.job(id);
        match self.knowledge {
            Knowledge::Exact => j.exec_remaining,
            Knowledge::Mean => (self.means[j.stream] - p.work_done(id)).max(0.0),
        }
    }

    fn eligible(&self, p: &PendingSet, id: JobId) -> bool {
        p.now() + self.estimate(p, id) <= p.job(id).deadline_abs
    }

    /// Longest job, among eligible ones only if `only_eligible`. Ties:
    /// earlier deadline, lower id.
    fn longest(&self, p: &PendingSet, only_eligible: bool) -> Option<JobId> {
        p.active()
            .iter()
            .copied()
            .filter(|&id| !only_eligible || self.eligible(p, id))
            .max_by(|&a, &b| {
                self.estimate(p, a)
                    .total_cmp(&self.estimate(p, b))
                    .then(p.job(b).deadline_abs.total_cmp(&p.job(a).deadline_abs))
                    .then(b.cmp(&a))
            })
    }

    fn close_phase(&mut self, now: f64) {
        if let Some(last) = self.phases.last_mut() {
            if last.end.is_none() {
                last.end = Some(now);
            }
        }
    }

    fn open_phase(&mut self, kind: PhaseKind, start: f64, planned: f64) {
        if self.record {
            self.close_phase(start);
            self.phases.push(PhaseRecord { kind, start, planned, end: None });
        }
    }

    fn start_odd(&mut self, p: &PendingSet) -> Decision {
        let Some(job) = self.longest(p, true) else {
            let job = self.longest(p, false).expect("pending set is nonempty");
            self.close_phase(p.now());
            self.phase = Phase::Idle;
            return Decision::Run { job, until: None };
        };
        let planned = self.estimate(p, job);
        self.open_phase(PhaseKind::Odd, p.now(), planned);
        self.phase = Phase::Odd { job, planned };
        Decision::Run { job, until: None }
    }
}

impl TracePolicy for Robust {
    fn name(&self) -> &str {
        match self.knowledge {
            Knowledge::Exact => "robust",
            Knowledge::Mean => "robust-mean",
        }
    }

    fn decide(&mut self, pending: &mut PendingSet, _running: Option<JobId>) -> Decision {
        let now = pending.now();
        loop {
            match self.phase {
                Phase::Odd { job, .. } if pending.is_active(job) => {
                    return Decision::Run { job, until: None };
                }
                Phase::Odd { planned, .. } => {
                    let end = now + planned / (self.slack - 1.0);
                    self.open_phase(PhaseKind::Even, now, end - now);
                    self.phase = Phase::Even { end };
                }
                _ if pending.is_empty() => {
                    if self.record {
                        self.close_phase(now);
                    }
                    self.phase = Phase::Idle;
                    return Decision::Idle;
                }
                Phase::Even { end } if now < end => {
                    let job = self.longest(pending, false).expect("nonempty");
                    return Decision::Run { job, until: Some(end) };
                }
                Phase::Even { .. } | Phase::Idle => return self.start_odd(pending),
            }
        }
    }
}
