//! Birth-death queue with reneging.
//!
//! A stream served at aggregate rate `a` while every queued job may expire at
//! rate `d` has queue length distributed as
//!
//! ```text
//! P(L = l) = pi0 * r^l / prod_{m=1..l} (a + m d)
//! ```
//!
//! All series are evaluated by ratio recursion, never by separate powers and
//! factorials.

use crate::error::{Error, Result};
use crate::workload::StreamSpec;

/// Relative truncation threshold for the normalizing series.
pub const SERIES_TOL: f64 = 1e-14;
/// Hard cap on the number of series terms.
pub const MAX_TERMS: usize = 1_000_000;

/// Rates of one birth-death queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueParams {
    arrival_rate: f64,
    service: f64,
    deadline_rate: f64,
}

impl QueueParams {
    pub fn new(arrival_rate: f64, service: f64, deadline_rate: f64) -> Result<Self> {
        if !(arrival_rate >= 0.0 && arrival_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("arrival rate {arrival_rate}")));
        }
        if !(service >= 0.0 && service.is_finite()) {
            return Err(Error::InvalidParameter(format!("service rate {service}")));
        }
        if !(deadline_rate > 0.0 && deadline_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("deadline rate {deadline_rate}")));
        }
        Ok(Self { arrival_rate, service, deadline_rate })
    }

    /// Queue of `stream` when it receives fraction `f` of the processor.
    pub fn for_stream(stream: &StreamSpec, f: f64) -> Result<Self> {
        Self::new(stream.rate(), stream.service_rate() * f, stream.deadline_rate())
    }

    pub fn arrival_rate(&self) -> f64 {
        self.arrival_rate
    }
    pub fn service(&self) -> f64 {
        self.service
    }
    pub fn deadline_rate(&self) -> f64 {
        self.deadline_rate
    }

    /// Same queue with `extra` added to the service rate.
    pub fn shifted(&self, extra: f64) -> Self {
        Self { service: self.service + extra, ..*self }
    }

    /// Ratio `term_{l} / term_{l-1}` of the unnormalized series.
    fn ratio(&self, l: usize) -> f64 {
        self.arrival_rate / (self.service + l as f64 * self.deadline_rate)
    }
}

const RESCALE: f64 = 1e200;

/// Natural log of the unnormalized series sum, with the number of terms
/// used. Partial sums are rescaled so heavy loads do not overflow.
fn log_normalizer(p: &QueueParams, tol: f64) -> Result<(f64, usize)> {
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut log_scale = 0.0;
    for l in 1..=MAX_TERMS {
        let next = term * p.ratio(l);
        sum += next;
        if !sum.is_finite() {
            return Err(Error::Numerical(format!(
                "normalizing series overflowed for {p:?}"
            )));
        }
        let decreasing = next <= term;
        term = next;
        if decreasing && term < tol * sum {
            return Ok((sum.ln() + log_scale, l));
        }
        if sum > RESCALE {
            sum /= RESCALE;
            term /= RESCALE;
            log_scale += RESCALE.ln();
        }
    }
    Err(Error::Numerical(format!(
        "normalizing series did not converge within {MAX_TERMS} terms for {p:?}"
    )))
}

/// Probability that the queue is empty, with an explicit relative tolerance.
pub fn pi0_with_tol(p: &QueueParams, tol: f64) -> Result<f64> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} outside (0, 1)")));
    }
    if p.arrival_rate == 0.0 {
        return Ok(1.0);
    }
    log_normalizer(p, tol).map(|(log_sum, _)| (-log_sum).exp())
}

/// Probability that the queue is empty.
pub fn pi0(p: &QueueParams) -> Result<f64> {
    pi0_with_tol(p, SERIES_TOL)
}

/// Stationary probability of queue length `l`.
pub fn stationary(p: &QueueParams, l: usize) -> Result<f64> {
    Ok(stationary_vec(p, l)?[l])
}

/// Stationary probabilities for lengths `0..=l_max`.
pub fn stationary_vec(p: &QueueParams, l_max: usize) -> Result<Vec<f64>> {
    if p.arrival_rate == 0.0 {
        let mut out = vec![0.0; l_max + 1];
        out[0] = 1.0;
        return Ok(out);
    }
    let (log_sum, _) = log_normalizer(p, SERIES_TOL)?;
    let mut log_prob = -log_sum;
    let mut out = Vec::with_capacity(l_max + 1);
    out.push(log_prob.exp());
    for m in 1..=l_max {
        log_prob += p.ratio(m).ln();
        out.push(log_prob.exp());
    }
    Ok(out)
}

/// Number of terms the truncation rule keeps for `p`.
pub fn truncation_length(p: &QueueParams) -> Result<usize> {
    if p.arrival_rate == 0.0 {
        return Ok(0);
    }
    log_normalizer(p, SERIES_TOL).map(|(_, n)| n)
}

/// Probability mass strictly above `cap`.
pub fn tail_mass(p: &QueueParams, cap: usize) -> Result<f64> {
    let probs = stationary_vec(p, cap)?;
    let below: f64 = probs.iter().sum();
    Ok((1.0 - below).max(0.0))
}

/// Long-run revenue rate of `stream` under a fixed share `f`:
/// `v s f (1 - pi0(r, s f, d))`.
pub fn stream_revenue(stream: &StreamSpec, f: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidParameter(format!("allocation {f} outside [0, 1]")));
    }
    if f == 0.0 {
        return Ok(0.0);
    }
    let p = QueueParams::for_stream(stream, f)?;
    Ok(stream.value() * stream.service_rate() * f * (1.0 - pi0(&p)?))
}

/// Revenue rate of the fractional allocation `f`, summed over streams.
pub fn total_revenue(streams: &[StreamSpec], f: &[f64]) -> Result<f64> {
    if streams.len() != f.len() {
        return Err(Error::DimensionMismatch { expected: streams.len(), found: f.len() });
    }
    streams.iter().zip(f).map(|(s, &fi)| stream_revenue(s, fi)).sum()
}
