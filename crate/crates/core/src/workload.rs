//! Service classes, workload validation and job-trace sampling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Quantity};

/// One service class: Poisson arrivals, exponential execution times and
/// exponential relative deadlines, fixed reward per completed job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStream", into = "RawStream")]
pub struct StreamSpec {
    id: usize,
    rate: f64,
    mean_exec: f64,
    mean_deadline: f64,
    value: f64,
}

impl StreamSpec {
    pub fn new(id: usize, rate: f64, mean_exec: f64, mean_deadline: f64, value: f64) -> Result<Self> {
        for (name, x) in [
            ("rate", rate),
            ("mean_exec", mean_exec),
            ("mean_deadline", mean_deadline),
            ("value", value),
        ] {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidWorkload(format!(
                    "stream {id}: {name} must be finite and > 0, got {x}"
                )));
            }
        }
        Ok(Self { id, rate, mean_exec, mean_deadline, value })
    }

    /// Builds a stream from its mean inter-arrival time instead of its rate.
    pub fn with_interarrival(
        id: usize,
        mean_interarrival: f64,
        mean_exec: f64,
        mean_deadline: f64,
        value: f64,
    ) -> Result<Self> {
        if !(mean_interarrival.is_finite() && mean_interarrival > 0.0) {
            return Err(Error::InvalidWorkload(format!(
                "stream {id}: mean inter-arrival must be finite and > 0, got {mean_interarrival}"
            )));
        }
        Self::new(id, 1.0 / mean_interarrival, mean_exec, mean_deadline, value)
    }

    pub fn id(&self) -> usize {
        self.id
    }
    pub fn rate(&self) -> f64 {
        self.rate
    }
    pub fn mean_exec(&self) -> f64 {
        self.mean_exec
    }
    pub fn mean_deadline(&self) -> f64 {
        self.mean_deadline
    }
    pub fn value(&self) -> f64 {
        self.value
    }
    /// Service rate `1 / mean_exec`.
    pub fn service_rate(&self) -> f64 {
        1.0 / self.mean_exec
    }
    /// Deadline-expiry rate `1 / mean_deadline`.
    pub fn deadline_rate(&self) -> f64 {
        1.0 / self.mean_deadline
    }
    /// Offered load `mean_exec * rate`.
    pub fn utilization(&self) -> f64 {
        self.mean_exec * self.rate
    }

    pub fn with_id(mut self, id: usize) -> Self {
        self.id = id;
        self
    }

    /// Same stream with every reward multiplied by `factor`.
    pub fn scaled_value(&self, factor: f64) -> Result<Self> {
        Self::new(self.id, self.rate, self.mean_exec, self.mean_deadline, self.value * factor)
    }
}

#[derive(Serialize, Deserialize)]
struct RawStream {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rate: Option<f64>,
    #[serde(default, rename = "P", skip_serializing_if = "Option::is_none")]
    interarrival: Option<f64>,
    mean_exec: f64,
    mean_deadline: f64,
    value: f64,
}

impl TryFrom<RawStream> for StreamSpec {
    type Error = Error;

    fn try_from(raw: RawStream) -> Result<Self> {
        let id = raw.id.unwrap_or(usize::MAX);
        match (raw.rate, raw.interarrival) {
            (Some(rate), None) => Self::new(id, rate, raw.mean_exec, raw.mean_deadline, raw.value),
            (None, Some(p)) => Self::with_interarrival(id, p, raw.mean_exec, raw.mean_deadline, raw.value),
            _ => Err(Error::InvalidWorkload(
                "exactly one of \"rate\" and \"P\" must be given".into(),
            )),
        }
    }
}

impl From<StreamSpec> for RawStream {
    fn from(s: StreamSpec) -> Self {
        RawStream {
            id: None,
            rate: Some(s.rate),
            interarrival: None,
            mean_exec: s.mean_exec,
            mean_deadline: s.mean_deadline,
            value: s.value,
        }
    }
}

/// How a job's relative deadline is drawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeadlineRule {
    /// Exponential offset with the stream's mean deadline.
    #[default]
    Exponential,
    /// Offset equal to `mean_deadline / mean_exec` times the job's own
    /// execution requirement, i.e. a hard per-job slack factor.
    Proportional,
}

impl std::str::FromStr for DeadlineRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponential" => Ok(Self::Exponential),
            "proportional" => Ok(Self::Proportional),
            other => Err(Error::InvalidParameter(format!("unknown deadline rule {other:?}"))),
        }
    }
}

/// A complete workload: streams, simulated horizon and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWorkload", into = "RawWorkload")]
pub struct WorkloadSpec {
    streams: Vec<StreamSpec>,
    horizon: f64,
    seed: u64,
    deadline_rule: DeadlineRule,
}

#[derive(Serialize, Deserialize)]
struct RawWorkload {
    streams: Vec<RawStream>,
    horizon: f64,
    seed: u64,
    #[serde(default)]
    deadline_rule: DeadlineRule,
}

impl TryFrom<RawWorkload> for WorkloadSpec {
    type Error = Error;

    fn try_from(raw: RawWorkload) -> Result<Self> {
        // Ids in files are positional.
        let streams = raw
            .streams
            .into_iter()
            .enumerate()
            .map(|(i, s)| StreamSpec::try_from(RawStream { id: Some(i), ..s }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(streams, raw.horizon, raw.seed)?.with_deadline_rule(raw.deadline_rule))
    }
}

impl From<WorkloadSpec> for RawWorkload {
    fn from(w: WorkloadSpec) -> Self {
        RawWorkload {
            streams: w.streams.into_iter().map(RawStream::from).collect(),
            horizon: w.horizon,
            seed: w.seed,
            deadline_rule: w.deadline_rule,
        }
    }
}

impl WorkloadSpec {
    pub fn new(streams: Vec<StreamSpec>, horizon: f64, seed: u64) -> Result<Self> {
        if streams.is_empty() {
            return Err(Error::InvalidWorkload("at least one stream is required".into()));
        }
        for (i, s) in streams.iter().enumerate() {
            if s.id != i {
                return Err(Error::InvalidWorkload(format!(
                    "stream ids must be 0..{}, found id {} at position {i}",
                    streams.len() - 1,
                    s.id
                )));
            }
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidWorkload(format!("horizon must be > 0, got {horizon}")));
        }
        Ok(Self { streams, horizon, seed, deadline_rule: DeadlineRule::Exponential })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("workload serializes")
    }

    pub fn with_deadline_rule(mut self, rule: DeadlineRule) -> Self {
        self.deadline_rule = rule;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_horizon(self, horizon: f64) -> Result<Self> {
        Self::new(self.streams, horizon, self.seed).map(|w| w.with_deadline_rule(self.deadline_rule))
    }

    pub fn streams(&self) -> &[StreamSpec] {
        &self.streams
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn deadline_rule(&self) -> DeadlineRule {
        self.deadline_rule
    }

    /// Aggregate offered load `sum(e_i * r_i)`.
    pub fn utilization(&self) -> f64 {
        utilization(&self.streams)
    }

    /// Strictly more work offered than one processor can serve.
    pub fn is_overloaded(&self) -> bool {
        self.utilization() > 1.0
    }

    /// Samples a trace with this workload's own seed.
    pub fn sample_trace(&self) -> Vec<Job> {
        sample_trace(self)
    }
}

pub fn utilization(streams: &[StreamSpec]) -> f64 {
    streams.iter().map(StreamSpec::utilization).sum()
}

/// One sampled request.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub stream: usize,
    pub arrival: f64,
    pub exec_total: f64,
    pub exec_remaining: f64,
    pub deadline_abs: f64,
    pub reward: f64,
}

impl Job {
    pub fn new(stream: usize, arrival: f64, exec: f64, relative_deadline: f64, reward: f64) -> Self {
        Self {
            stream,
            arrival,
            exec_total: exec,
            exec_remaining: exec,
            deadline_abs: arrival + relative_deadline,
            reward,
        }
    }
}

/// Samples the job trace of `spec`: per-stream Poisson arrivals on `[0, horizon)`
/// merged in arrival order (ties by stream id).
pub fn sample_trace(spec: &WorkloadSpec) -> Vec<Job> {
    let mut jobs = Vec::new();
    for s in &spec.streams {
        let mut gaps = rng::substream(spec.seed, s.id, Quantity::Arrival);
        let mut execs = rng::substream(spec.seed, s.id, Quantity::Execution);
        let mut deadlines = rng::substream(spec.seed, s.id, Quantity::Deadline);
        let mut t = 0.0;
        loop {
            t += rng::exponential(&mut gaps, s.rate);
            if t >= spec.horizon {
                break;
            }
            let exec = rng::exponential(&mut execs, s.service_rate());
            let offset = match spec.deadline_rule {
                DeadlineRule::Exponential => rng::exponential(&mut deadlines, s.deadline_rate()),
                DeadlineRule::Proportional => exec * s.mean_deadline / s.mean_exec,
            };
            let mut job = Job::new(s.id, t, exec, offset, s.value);
            // Guard against an offset too small to move `t` in floating point.
            if job.deadline_abs <= t {
                job.deadline_abs = next_up(t);
            }
            jobs.push(job);
        }
    }
    jobs.sort_by(|a, b| a.arrival.total_cmp(&b.arrival).then(a.stream.cmp(&b.stream)));
    jobs
}

fn next_up(x: f64) -> f64 {
    f64::from_bits(x.to_bits() + 1)
}
