//! Runtime emulation of a fractional allocation.

use super::{Decision, JobId, PendingSet, QueuePolicy, TracePolicy};
use crate::error::{Error, Result};
use crate::fap::AllocationVector;

/// Exact processor sharing for the CTMC engine: every nonempty queue `i`
/// gets its fixed share `f_i`, whether or not other queues are empty.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalShares(pub AllocationVector);

impl QueuePolicy for FractionalShares {
    fn shares(&self, lengths: &[usize], rates: &mut [f64]) {
        for (i, rate) in rates.iter_mut().enumerate() {
            *rate = if lengths[i] > 0 { self.0[i] } else { 0.0 };
        }
    }
}

/// Weighted round robin for the trace engine. Each cycle of length
/// `quantum` is split among the nonempty streams in proportion to their
/// shares (equally if all of them have zero share); within a stream the
/// oldest job runs.
#[derive(Debug, Clone)]
pub struct WeightedRoundRobin {
    shares: AllocationVector,
    quantum: f64,
    slice: Option<(usize, f64)>,
}

impl WeightedRoundRobin {
    pub fn new(shares: AllocationVector, quantum: f64) -> Result<Self> {
        if !(quantum > 0.0 && quantum.is_finite()) {
            return Err(Error::InvalidParameter(format!("quantum must be > 0, got {quantum}")));
        }
        Ok(Self { shares, quantum, slice: None })
    }

    /// Quantum of one hundredth of the shortest mean execution time.
    pub fn default_quantum(mean_execs: &[f64]) -> f64 {
        mean_execs.iter().copied().fold(f64::INFINITY, f64::min) / 100.0
    }

    fn next_slice(&self, p: &PendingSet) -> Option<(usize, f64)> {
        let lengths = p.queue_lengths();
        let n = lengths.len();
        let weight = |i: usize| if lengths[i] > 0 { self.shares[i] } else { 0.0 };
        let total: f64 = (0..n).map(weight).sum();
        let nonempty = lengths.iter().filter(|&&l| l > 0).count();
        if nonempty == 0 {
            return None;
        }
        let usable = |i: usize| lengths[i] > 0 && (total == 0.0 || weight(i) > 0.0);
        let start = self.slice.map_or(0, |(i, _)| i + 1);
        let stream = (0..n).map(|k| (start + k) % n).find(|&i| usable(i))?;
        let fraction = if total > 0.0 { weight(stream) / total } else { 1.0 / nonempty as f64 };
        Some((stream, p.now() + self.quantum * fraction))
    }
}

impl TracePolicy for WeightedRoundRobin {
    fn name(&self) -> &str {
        "fap"
    }

    fn decide(&mut self, pending: &mut PendingSet, _running: Option<JobId>) -> Decision {
        let current = self
            .slice
            .filter(|&(i, end)| pending.now() < end && pending.queue_lengths()[i] > 0);
        let slice = match current {
            Some(s) => Some(s),
            None => {
                let s = self.next_slice(pending);
                if s.is_some() {
                    self.slice = s;
                }
                s
            }
        };
        match slice {
            Some((stream, end)) => Decision::Run {
                job: pending.head_of(stream).expect("nonempty stream"),
                until: Some(end),
            },
            None => Decision::Idle,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::Job;

    #[test]
    fn rejects_nonpositive_quantum() {
        assert!(WeightedRoundRobin::new(AllocationVector::uniform(2), 0.0).is_err());
        assert!(WeightedRoundRobin::new(AllocationVector::uniform(2), -1.0).is_err());
    }

    #[test]
    fn slices_follow_shares() {
        let f = AllocationVector::new(vec![0.75, 0.25]).unwrap();
        let mut w = WeightedRoundRobin::new(f, 4.0).unwrap();
        let mut p = PendingSet::new(2);
        let a = p.insert(Job::new(0, 0.0, 100.0, 1000.0, 1.0));
        let b = p.insert(Job::new(1, 0.0, 100.0, 1000.0, 1.0));
        assert_eq!(w.decide(&mut p, None), Decision::Run { job: a, until: Some(3.0) });
        p.set_now(3.0);
        assert_eq!(w.decide(&mut p, Some(a)), Decision::Run { job: b, until: Some(4.0) });
        p.set_now(4.0);
        assert_eq!(w.decide(&mut p, Some(b)).job(), Some(a));
    }

    #[test]
    fn empty_queues_cede_their_share() {
        let f = AllocationVector::new(vec![0.75, 0.25]).unwrap();
        let mut w = WeightedRoundRobin::new(f, 4.0).unwrap();
        let mut p = PendingSet::new(2);
        let b = p.insert(Job::new(1, 0.0, 100.0, 1000.0, 1.0));
        assert_eq!(w.decide(&mut p, None), Decision::Run { job: b, until: Some(4.0) });
    }

    #[test]
    fn zero_share_stream_still_served_when_alone() {
        let f = AllocationVector::new(vec![1.0, 0.0]).unwrap();
        let mut w = WeightedRoundRobin::new(f, 4.0).unwrap();
        let mut p = PendingSet::new(2);
        let b = p.insert(Job::new(1, 0.0, 100.0, 1000.0, 1.0));
        assert_eq!(w.decide(&mut p, None).job(), Some(b));
        let a = p.insert(Job::new(0, 0.0, 100.0, 1000.0, 1.0));
        p.set_now(4.0);
        assert_eq!(w.decide(&mut p, Some(b)).job(), Some(a));
    }

    #[test]
    fn ctmc_shares_are_fixed() {
        let f = FractionalShares(AllocationVector::new(vec![0.6, 0.4]).unwrap());
        let mut rates = [0.0; 2];
        f.shares(&[3, 0], &mut rates);
        assert_eq!(rates, [0.6, 0.0]);
        f.shares(&[1, 1], &mut rates);
        assert_eq!(rates, [0.6, 0.4]);
    }
}
