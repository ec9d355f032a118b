use crate::error::{Error, Result};

/// Per-stream counters of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StreamMetrics {
    pub arrivals: u64,
    pub completions: u64,
    pub expirations: u64,
    /// Jobs neither completed nor expired when the horizon was reached.
    pub still_pending: u64,
    pub revenue: f64,
}

/// Outcome of one simulated run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimMetrics {
    pub horizon: f64,
    pub revenue_total: f64,
    pub revenue_rate: f64,
    pub streams: Vec<StreamMetrics>,
    /// Time the processor spent executing any job.
    pub busy_time: f64,
    /// Time spent on jobs that went on to complete by their deadlines.
    pub useful_time: f64,
    /// Effective processor utilization, `useful_time / horizon`.
    pub epu: f64,
}

impl SimMetrics {
    pub(crate) fn new(n_streams: usize, horizon: f64) -> Self {
        Self { horizon, streams: vec![StreamMetrics::default(); n_streams], ..Self::default() }
    }

    pub(crate) fn finish(&mut self) {
        self.revenue_total = self.streams.iter().map(|s| s.revenue).sum();
        if self.horizon > 0.0 {
            self.revenue_rate = self.revenue_total / self.horizon;
            self.epu = self.useful_time / self.horizon;
        }
    }

    pub fn completions(&self) -> u64 {
        self.streams.iter().map(|s| s.completions).sum()
    }

    pub fn arrivals(&self) -> u64 {
        self.streams.iter().map(|s| s.arrivals).sum()
    }

    /// Checks the conservation and revenue identities given each stream's
    /// reward per completion.
    pub fn check(&self, rewards: &[f64]) -> Result<()> {
        let fail = |msg: String| Err(Error::Numerical(format!("metrics invariant violated: {msg}")));
        if rewards.len() != self.streams.len() {
            return Err(Error::DimensionMismatch { expected: self.streams.len(), found: rewards.len() });
        }
        for (i, s) in self.streams.iter().enumerate() {
            if s.arrivals != s.completions + s.expirations + s.still_pending {
                return fail(format!("stream {i}: arrivals do not balance: {s:?}"));
            }
            let expected = s.completions as f64 * rewards[i];
            if (s.revenue - expected).abs() > 1e-9 * expected.max(1.0) {
                return fail(format!("stream {i}: revenue {} != {expected}", s.revenue));
            }
        }
        let slack = 1e-9 * self.horizon.max(1.0);
        if self.useful_time < -slack
            || self.useful_time > self.busy_time + slack
            || self.busy_time > self.horizon + slack
        {
            return fail(format!(
                "time accounting: useful {} busy {} horizon {}",
                self.useful_time, self.busy_time, self.horizon
            ));
        }
        Ok(())
    }
}
