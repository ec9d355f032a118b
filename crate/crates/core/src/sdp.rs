//! Average-reward optimal scheduling for two streams.
//!
//! The controlled queue-length chain is truncated at `cap` jobs per stream
//! (arrivals to a full queue are lost), uniformized at
//! `rate = r1 + r2 + max(s1, s2) + cap (d1 + d2)`, and solved by relative
//! value iteration. Iteration stops when the span of successive value
//! differences drops below `tol`; the gain is the span midpoint times the
//! uniformization rate.

use rayon::prelude::*;

use crate::analytic::{self, QueueParams};
use crate::error::{Error, Result};
use crate::fap::AllocationVector;
use crate::schedulers::QueuePolicy;
use crate::workload::StreamSpec;

pub const DEFAULT_CAP: usize = 150;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITERS: usize = 1_000_000;

/// Rates of one stream as seen by the dynamic program. Unlike
/// [`StreamSpec`], a zero arrival rate is allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpStream {
    pub rate: f64,
    pub service_rate: f64,
    pub deadline_rate: f64,
    pub value: f64,
}

impl From<&StreamSpec> for SdpStream {
    fn from(s: &StreamSpec) -> Self {
        Self {
            rate: s.rate(),
            service_rate: s.service_rate(),
            deadline_rate: s.deadline_rate(),
            value: s.value(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Idle,
    Serve(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpModel {
    streams: [SdpStream; 2],
    cap: usize,
    uniformization: f64,
}

/// Uniformized one-step transitions out of a state under an action.
#[derive(Debug, Clone, Copy)]
pub struct Transitions {
    pub targets: [(usize, usize, f64); 6],
    pub len: usize,
    /// Expected reward of the step.
    pub reward: f64,
}

impl Transitions {
    pub fn iter(&self) -> impl Iterator<Item = &(usize, usize, f64)> {
        self.targets[..self.len].iter()
    }
}

impl SdpModel {
    pub fn new(streams: &[StreamSpec], cap: usize) -> Result<Self> {
        if streams.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: streams.len() });
        }
        Self::from_rates([(&streams[0]).into(), (&streams[1]).into()], cap)
    }

    pub fn from_rates(streams: [SdpStream; 2], cap: usize) -> Result<Self> {
        if cap == 0 {
            return Err(Error::InvalidParameter("cap must be at least 1".into()));
        }
        for s in &streams {
            let ok = s.rate >= 0.0 && s.service_rate > 0.0 && s.deadline_rate > 0.0 && s.value >= 0.0;
            if !ok || ![s.rate, s.service_rate, s.deadline_rate, s.value].iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidParameter(format!("invalid stream rates {s:?}")));
            }
        }
        let [a, b] = streams;
        let uniformization = a.rate
            + b.rate
            + a.service_rate.max(b.service_rate)
            + cap as f64 * (a.deadline_rate + b.deadline_rate);
        Ok(Self { streams, cap, uniformization })
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn uniformization(&self) -> f64 {
        self.uniformization
    }

    pub fn streams(&self) -> &[SdpStream; 2] {
        &self.streams
    }

    pub fn legal(&self, l1: usize, l2: usize, action: Action) -> bool {
        match action {
            Action::Idle => l1 == 0 && l2 == 0,
            Action::Serve(0) => l1 > 0,
            Action::Serve(1) => l2 > 0,
            Action::Serve(_) => false,
        }
    }

    pub fn transitions(&self, l1: usize, l2: usize, action: Action) -> Transitions {
        let lam = self.uniformization;
        let [a, b] = self.streams;
        let mut t = Transitions { targets: [(0, 0, 0.0); 6], len: 0, reward: 0.0 };
        let push = |t: &mut Transitions, x: usize, y: usize, p: f64| {
            if p > 0.0 {
                t.targets[t.len] = (x, y, p);
                t.len += 1;
            }
        };
        let mut stay = 1.0;
        if l1 < self.cap {
            push(&mut t, l1 + 1, l2, a.rate / lam);
            stay -= a.rate / lam;
        }
        if l2 < self.cap {
            push(&mut t, l1, l2 + 1, b.rate / lam);
            stay -= b.rate / lam;
        }
        if l1 > 0 {
            let p = l1 as f64 * a.deadline_rate / lam;
            let served = if action == Action::Serve(0) { a.service_rate / lam } else { 0.0 };
            push(&mut t, l1 - 1, l2, p + served);
            stay -= p + served;
            t.reward += served * a.value;
        }
        if l2 > 0 {
            let p = l2 as f64 * b.deadline_rate / lam;
            let served = if action == Action::Serve(1) { b.service_rate / lam } else { 0.0 };
            push(&mut t, l1, l2 - 1, p + served);
            stay -= p + served;
            t.reward += served * b.value;
        }
        push(&mut t, l1, l2, stay.max(0.0));
        t
    }

    /// Largest probability mass either marginal queue puts above the cap
    /// when run under the fractional allocation `f`.
    pub fn tail_mass_under(&self, f: &AllocationVector) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (s, &fi) in self.streams.iter().zip(f.as_slice()) {
            let q = QueueParams::new(s.rate, s.service_rate * fi, s.deadline_rate)?;
            worst = worst.max(analytic::tail_mass(&q, self.cap)?);
        }
        Ok(worst)
    }

    /// One Bellman sweep: writes the updated values into `next` and the
    /// greedy action into `policy`.
    fn sweep(&self, h: &[f64], next: &mut [f64], policy: &mut [Action]) {
        let n = self.cap + 1;
        let lam = self.uniformization;
        let [a, b] = self.streams;
        let cap = self.cap;
        next.par_chunks_mut(n).zip(policy.par_chunks_mut(n)).enumerate().for_each(
            |(l1, (row, acts))| {
                for l2 in 0..n {
                    let here = h[l1 * n + l2];
                    let up1 = if l1 < cap { h[(l1 + 1) * n + l2] } else { here };
                    let up2 = if l2 < cap { h[l1 * n + l2 + 1] } else { here };
                    let dn1 = if l1 > 0 { h[(l1 - 1) * n + l2] } else { here };
                    let dn2 = if l2 > 0 { h[l1 * n + l2 - 1] } else { here };
                    let e1 = l1 as f64 * a.deadline_rate;
                    let e2 = l2 as f64 * b.deadline_rate;
                    let base = a.rate * up1 + b.rate * up2 + e1 * dn1 + e2 * dn2
                        + (lam - a.rate - b.rate - e1 - e2) * here;
                    let serve1 = a.service_rate * (a.value + dn1 - here);
                    let serve2 = b.service_rate * (b.value + dn2 - here);
                    let (gain, act) = match (l1 > 0, l2 > 0) {
                        (false, false) => (0.0, Action::Idle),
                        (true, false) => (serve1, Action::Serve(0)),
                        (false, true) => (serve2, Action::Serve(1)),
                        (true, true) if serve1 >= serve2 => (serve1, Action::Serve(0)),
                        (true, true) => (serve2, Action::Serve(1)),
                    };
                    row[l2] = (base + gain) / lam;
                    acts[l2] = act;
                }
            },
        );
    }

    /// Relative value iteration.
    pub fn solve(&self, tol: f64, max_iters: usize) -> Result<SdpSolution> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {tol}")));
        }
        let states = (self.cap + 1) * (self.cap + 1);
        let mut h = vec![0.0; states];
        let mut next = vec![0.0; states];
        let mut policy = vec![Action::Idle; states];
        let mut span = f64::INFINITY;
        for iter in 1..=max_iters {
            self.sweep(&h, &mut next, &mut policy);
            let (lo, hi) = next
                .iter()
                .zip(&h)
                .map(|(x, y)| x - y)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| (lo.min(d), hi.max(d)));
            span = hi - lo;
            let anchor = next[0];
            for (dst, src) in h.iter_mut().zip(&next) {
                *dst = src - anchor;
            }
            if span < tol {
                return Ok(SdpSolution {
                    gain: self.uniformization * 0.5 * (lo + hi),
                    bias: h,
                    policy,
                    iterations: iter,
                    cap: self.cap,
                });
            }
        }
        Err(Error::NonConvergence { iterations: max_iters, span })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    /// Optimal revenue per unit time.
    pub gain: f64,
    /// Relative state values, row-major over `(l1, l2)`, zero at `(0, 0)`.
    pub bias: Vec<f64>,
    pub policy: Vec<Action>,
    pub iterations: usize,
    pub cap: usize,
}

impl SdpSolution {
    pub fn action(&self, l1: usize, l2: usize) -> Action {
        let l1 = l1.min(self.cap);
        let l2 = l2.min(self.cap);
        self.policy[l1 * (self.cap + 1) + l2]
    }

    /// `(l1, l2, action)` for every state.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Action)> + '_ {
        let n = self.cap + 1;
        self.policy.iter().enumerate().map(move |(k, &a)| (k / n, k % n, a))
    }
}

/// Queue lengths beyond the cap follow the action of the capped state.
impl QueuePolicy for SdpSolution {
    fn shares(&self, lengths: &[usize], rates: &mut [f64]) {
        rates.fill(0.0);
        if let Action::Serve(i) = self.action(lengths[0], lengths[1]) {
            rates[i] = 1.0;
        }
    }
}

/// Percentage revenue lost relative to the optimal gain:
/// `100 (g - rate) / g`.
pub fn gap(solution: &SdpSolution, revenue_rate: f64) -> Result<f64> {
    percentage_loss(solution.gain, revenue_rate)
}

pub fn percentage_loss(optimal: f64, achieved: f64) -> Result<f64> {
    if !(optimal > 0.0) {
        return Err(Error::InvalidParameter(format!("optimal gain must be > 0, got {optimal}")));
    }
    Ok(100.0 * (optimal - achieved) / optimal)
}
