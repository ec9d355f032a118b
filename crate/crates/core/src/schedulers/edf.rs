use super::{Decision, JobId, PendingSet, TracePolicy};

/// Ordering key of EDF: deadline, then arrival, then stream, then id.
pub(crate) fn edf_key(p: &PendingSet, id: JobId) -> (f64, f64, usize, JobId) {
    let j = p.job(id);
    (j.deadline_abs, j.arrival, j.stream, id)
}

pub(crate) fn edf_cmp(p: &PendingSet, a: JobId, b: JobId) -> std::cmp::Ordering {
    let (da, aa, sa, ia) = edf_key(p, a);
    let (db, ab, sb, ib) = edf_key(p, b);
    da.total_cmp(&db).then(aa.total_cmp(&ab)).then(sa.cmp(&sb)).then(ia.cmp(&ib))
}

/// Earliest-deadline active job.
pub fn edf_select(p: &PendingSet) -> Decision {
    p.active()
        .iter()
        .copied()
        .min_by(|&a, &b| edf_cmp(p, a, b))
        .map_or(Decision::Idle, |job| Decision::Run { job, until: None })
}

/// Preemptive earliest deadline first.
#[derive(Debug, Default, Clone)]
pub struct Edf;

impl TracePolicy for Edf {
    fn name(&self) -> &str {
        "edf"
    }

    fn decide(&mut self, pending: &mut PendingSet, _running: Option<JobId>) -> Decision {
        edf_select(pending)
    }
}
