//! Robust EDF: EDF with overload detection at arrivals. When the pending set
//! stops being EDF-feasible, the lowest-reward job is moved to a reject queue
//! (the parked list), one job at a time until feasibility returns. Rejected
//! jobs that are still alive come back, best reward first, when a completion
//! frees processor time.

use super::edf::{edf_cmp, edf_select};
use super::{Decision, JobId, PendingSet, TracePolicy};

/// Dynamic EDF demand test: serving the active jobs in deadline order from
/// `now`, every job finishes by its deadline.
pub fn edf_feasible(p: &PendingSet) -> bool {
    let mut order: Vec<JobId> = p.active().to_vec();
    order.sort_by(|&a, &b| edf_cmp(p, a, b));
    let mut t = p.now();
    for id in order {
        let j = p.job(id);
        t += j.exec_remaining;
        if t > j.deadline_abs {
            return false;
        }
    }
    true
}

/// Restores feasibility after `arriving` joined the active list. Returns the
/// rejected jobs in rejection order.
pub fn redf_admit(p: &mut PendingSet, arriving: JobId) -> Vec<JobId> {
    debug_assert!(p.job(arriving).deadline_abs > p.now());
    let mut rejected = Vec::new();
    while !edf_feasible(p) {
        // Lowest reward; among equals the latest deadline.
        let victim = p
            .active()
            .iter()
            .copied()
            .min_by(|&a, &b| {
                let (ja, jb) = (p.job(a), p.job(b));
                ja.reward
                    .total_cmp(&jb.reward)
                    .then(jb.deadline_abs.total_cmp(&ja.deadline_abs))
                    .then(b.cmp(&a))
            })
            .expect("an infeasible set is nonempty");
        p.park(victim);
        rejected.push(victim);
    }
    rejected
}

/// Re-admits parked jobs, highest reward first, while the active set stays
/// feasible. Returns the re-admitted jobs.
pub fn redf_resurrect(p: &mut PendingSet) -> Vec<JobId> {
    let now = p.now();
    let mut candidates: Vec<JobId> =
        p.parked().iter().copied().filter(|&id| p.job(id).deadline_abs > now).collect();
    candidates.sort_by(|&a, &b| {
        let (ja, jb) = (p.job(a), p.job(b));
        jb.reward.total_cmp(&ja.reward).then(edf_cmp(p, a, b))
    });
    let mut back = Vec::new();
    for id in candidates {
        p.unpark(id);
        if edf_feasible(p) {
            back.push(id);
        } else {
            p.park(id);
            break;
        }
    }
    back
}

#[derive(Debug, Default, Clone)]
pub struct Redf {
    rejections: usize,
    resurrections: usize,
}

impl Redf {
    pub fn new() -> Self {
        Self::default()
    }

    /// Jobs moved to the reject queue so far.
    pub fn rejections(&self) -> usize {
        self.rejections
    }

    pub fn resurrections(&self) -> usize {
        self.resurrections
    }
}

impl TracePolicy for Redf {
    fn name(&self) -> &str {
        "redf"
    }

    fn on_arrival(&mut self, pending: &mut PendingSet, job: JobId) {
        self.rejections += redf_admit(pending, job).len();
    }

    fn on_completion(&mut self, pending: &mut PendingSet, _job: JobId) {
        self.resurrections += redf_resurrect(pending).len();
    }

    fn decide(&mut self, pending: &mut PendingSet, _running: Option<JobId>) -> Decision {
        // Never idle while live rejected jobs remain.
        if pending.is_empty() && !pending.parked().is_empty() {
            self.resurrections += redf_resurrect(pending).len();
            if pending.is_empty() {
                let best = pending.parked().iter().copied().max_by(|&a, &b| {
                    pending.job(a).reward.total_cmp(&pending.job(b).reward).then(b.cmp(&a))
                });
                if let Some(id) = best {
                    pending.unpark(id);
                    self.resurrections += 1;
                }
            }
        }
        edf_select(pending)
    }
}
