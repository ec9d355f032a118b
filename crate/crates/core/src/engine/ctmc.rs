use rand::Rng;

use super::SimMetrics;
use crate::error::{Error, Result};
use crate::rng;
use crate::schedulers::QueuePolicy;
use crate::workload::StreamSpec;

/// Simulates the joint queue-length chain under a queue-length policy.
///
/// Arrivals of stream `i` occur at rate `r_i`, each of its `l_i` queued jobs
/// (the one in service included) expires at rate `d_i`, and the head job
/// completes at rate `share_i * s_i`. Revenue `v_i` is earned at each
/// completion before `horizon`.
///
/// Processor time is attributed to the head job of each queue; a completion
/// turns that job's accumulated time into useful time, while an expiry hits
/// the head job with probability `1 / l_i` and discards its accumulated time.
pub fn run_ctmc(
    streams: &[StreamSpec],
    policy: &dyn QueuePolicy,
    horizon: f64,
    seed: u64,
) -> Result<SimMetrics> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be >= 0, got {horizon}")));
    }
    let n = streams.len();
    let mut metrics = SimMetrics::new(n, horizon);
    let mut rng = rng::ctmc_stream(seed);
    let mut lengths = vec![0usize; n];
    let mut shares = vec![0.0; n];
    let mut head_work = vec![0.0; n];
    let mut t = 0.0;

    loop {
        policy.shares(&lengths, &mut shares);
        let mut total = 0.0;
        for (i, s) in streams.iter().enumerate() {
            debug_assert!(lengths[i] > 0 || shares[i] == 0.0);
            total += s.rate() + lengths[i] as f64 * s.deadline_rate() + shares[i] * s.service_rate();
        }
        let next = t + rng::exponential(&mut rng, total);
        let end = next.min(horizon);
        let dt = end - t;
        for i in 0..n {
            metrics.busy_time += shares[i] * dt;
            head_work[i] += shares[i] * dt;
        }
        if next >= horizon {
            break;
        }
        t = next;

        let mut u = rng.gen::<f64>() * total;
        let mut fired = None;
        'pick: for (i, s) in streams.iter().enumerate() {
            for (kind, rate) in [
                (Clock::Arrival, s.rate()),
                (Clock::Expiry, lengths[i] as f64 * s.deadline_rate()),
                (Clock::Completion, shares[i] * s.service_rate()),
            ] {
                if rate <= 0.0 {
                    continue;
                }
                fired = Some((i, kind));
                if u < rate {
                    break 'pick;
                }
                u -= rate;
            }
        }
        let (i, kind) = fired.expect("total rate is positive");
        let m = &mut metrics.streams[i];
        match kind {
            Clock::Arrival => {
                lengths[i] += 1;
                m.arrivals += 1;
            }
            Clock::Expiry => {
                if rng.gen_range(0..lengths[i]) == 0 {
                    head_work[i] = 0.0;
                }
                lengths[i] -= 1;
                m.expirations += 1;
            }
            Clock::Completion => {
                lengths[i] -= 1;
                m.completions += 1;
                m.revenue += streams[i].value();
                metrics.useful_time += head_work[i];
                head_work[i] = 0.0;
            }
        }
    }

    for (m, &l) in metrics.streams.iter_mut().zip(&lengths) {
        m.still_pending = l as u64;
    }
    metrics.finish();
    Ok(metrics)
}

#[derive(Clone, Copy)]
enum Clock {
    Arrival,
    Expiry,
    Completion,
}
