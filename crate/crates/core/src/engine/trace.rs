use super::{EventKind, EventLog, SimMetrics};
use crate::error::{Error, Result};
use crate::schedulers::{Decision, JobId, PendingSet, TracePolicy};
use crate::workload::Job;

fn validate(trace: &[Job], n_streams: usize) -> Result<()> {
    let mut prev = f64::NEG_INFINITY;
    for (k, j) in trace.iter().enumerate() {
        let bad = |what: &str| Err(Error::MalformedTrace(format!("job {k}: {what}")));
        if !(j.arrival.is_finite() && j.arrival >= 0.0) {
            return bad("arrival must be finite and >= 0");
        }
        if j.arrival < prev {
            return bad("trace is not sorted by arrival");
        }
        prev = j.arrival;
        if !(j.exec_total.is_finite() && j.exec_total > 0.0) {
            return bad("execution requirement must be > 0");
        }
        if !(j.exec_remaining > 0.0 && j.exec_remaining <= j.exec_total) {
            return bad("remaining execution must lie in (0, total]");
        }
        if !(j.deadline_abs > j.arrival) {
            return bad("deadline must follow arrival");
        }
        if !(j.reward.is_finite() && j.reward >= 0.0) {
            return bad("reward must be finite and >= 0");
        }
        if j.stream >= n_streams {
            return bad("stream id out of range");
        }
    }
    Ok(())
}

/// Replays `trace` under `policy` until `horizon`.
///
/// The running job's remaining execution drains at unit rate. Decision
/// points are arrivals, completions, deadlines (of active and parked jobs)
/// and any time the policy asked to be woken at. At an instant carrying
/// several events, expiries are handled first, then the completion, then
/// arrivals in trace order; a running job whose deadline passes is aborted
/// without revenue.
pub fn run_trace(
    trace: &[Job],
    n_streams: usize,
    policy: &mut dyn TracePolicy,
    horizon: f64,
) -> Result<SimMetrics> {
    run(trace, n_streams, policy, horizon, None)
}

/// [`run_trace`] that also records every event.
pub fn run_trace_logged(
    trace: &[Job],
    n_streams: usize,
    policy: &mut dyn TracePolicy,
    horizon: f64,
    log: &mut EventLog,
) -> Result<SimMetrics> {
    run(trace, n_streams, policy, horizon, Some(log))
}

fn run(
    trace: &[Job],
    n_streams: usize,
    policy: &mut dyn TracePolicy,
    horizon: f64,
    mut log: Option<&mut EventLog>,
) -> Result<SimMetrics> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be >= 0, got {horizon}")));
    }
    validate(trace, n_streams)?;
    let mut emit = |time: f64, kind: EventKind, stream: usize, job: usize| {
        if let Some(log) = log.as_deref_mut() {
            log.push(time, kind, stream, job);
        }
    };

    let mut metrics = SimMetrics::new(n_streams, horizon);
    let mut pending = PendingSet::new(n_streams);
    let mut next_arrival = 0;
    let mut running: Option<JobId> = None;
    let mut wake: Option<f64> = None;
    let mut t = 0.0;

    loop {
        let arrival_at = trace.get(next_arrival).map_or(f64::INFINITY, |j| j.arrival);
        let completion_at = running.map_or(f64::INFINITY, |id| t + pending.job(id).exec_remaining);
        let deadline_at = pending.next_deadline().unwrap_or(f64::INFINITY);
        let wake_at = wake.unwrap_or(f64::INFINITY);
        let t_next = arrival_at.min(completion_at).min(deadline_at).min(wake_at);
        if t_next > horizon {
            if let Some(id) = running {
                let dt = horizon - t;
                pending.job_mut(id).exec_remaining -= dt;
                metrics.busy_time += dt;
            }
            break;
        }
        debug_assert!(t_next >= t);

        // Advance the running job.
        let dt = t_next - t;
        let completes = running.is_some() && completion_at <= t_next;
        if let Some(id) = running {
            let job = pending.job_mut(id);
            job.exec_remaining = if completes { 0.0 } else { (job.exec_remaining - dt).max(0.0) };
            metrics.busy_time += dt;
        }
        t = t_next;
        pending.set_now(t);

        for id in pending.expire() {
            let stream = pending.job(id).stream;
            metrics.streams[stream].expirations += 1;
            emit(t, EventKind::Expiry, stream, id);
            if running == Some(id) {
                running = None;
            }
        }

        if completes {
            if let Some(id) = running.take() {
                let job = pending.job(id).clone();
                pending.remove(id);
                let m = &mut metrics.streams[job.stream];
                m.completions += 1;
                m.revenue += job.reward;
                metrics.useful_time += job.exec_total;
                emit(t, EventKind::Completion, job.stream, id);
                policy.on_completion(&mut pending, id);
            }
        }

        while next_arrival < trace.len() && trace[next_arrival].arrival <= t {
            let job = trace[next_arrival].clone();
            next_arrival += 1;
            metrics.streams[job.stream].arrivals += 1;
            let stream = job.stream;
            let id = pending.insert(job);
            emit(t, EventKind::Arrival, stream, id);
            policy.on_arrival(&mut pending, id);
        }

        if running.is_some_and(|id| !pending.is_active(id)) {
            running = None;
        }
        let decision = policy.decide(&mut pending, running);
        let chosen = decision.job();
        if let Some(id) = chosen {
            if !pending.is_active(id) {
                return Err(Error::InvalidParameter(format!(
                    "policy {} chose job {id}, which is not active",
                    policy.name()
                )));
            }
        } else if !pending.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "policy {} idled with {} active jobs",
                policy.name(),
                pending.active().len()
            )));
        }
        if let (Some(prev), Some(next)) = (running, chosen) {
            if prev != next {
                emit(t, EventKind::Preemption, pending.job(prev).stream, prev);
            }
        }
        running = chosen;
        wake = match decision {
            Decision::Run { until: Some(u), .. } if u > t => Some(u),
            _ => None,
        };
    }

    for id in pending.active().iter().chain(pending.parked()) {
        metrics.streams[pending.job(*id).stream].still_pending += 1;
    }
    metrics.finish();
    Ok(metrics)
}
