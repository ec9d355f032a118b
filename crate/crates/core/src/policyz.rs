//! The Policy Z priority index.
//!
//! Starting from a fractional allocation `f`, stream `i` holding `l` queued
//! jobs gets the index
//!
//! ```text
//! Z_i(l) = v s [1 - (s f pi0(r, s f, d)) / ((s f + l d) pi0(r, s f + l d, d))]
//! ```
//!
//! which is `s (v - dV)` where `dV` is the change in the stream's value under
//! the fractional policy when its queue grows from `l - 1` to `l`. At every
//! decision instant the nonempty stream with the largest index is served.
//! Indices depend only on `(stream, l)`, so they are tabulated offline.

use crate::analytic::{self, QueueParams};
use crate::error::{Error, Result};
use crate::fap::AllocationVector;
use crate::workload::StreamSpec;

/// Default table length; longer queues use the limit `v s`.
pub const DEFAULT_L_MAX: usize = 1024;

/// Relative slack allowed when checking monotonicity of a built table.
const MONOTONE_SLACK: f64 = 1e-12;

/// Revenue lost by the fractional policy when stream `stream` loses one of
/// its `l` queued jobs:
/// `v s f pi0(r, s f, d) / ((s f + l d) pi0(r, s f + l d, d))`.
pub fn value_difference(stream: &StreamSpec, f: f64, l: usize) -> Result<f64> {
    check_args(f, l)?;
    let a = stream.service_rate() * f;
    if a == 0.0 {
        return Ok(0.0);
    }
    let base = QueueParams::for_stream(stream, f)?;
    let shift = l as f64 * stream.deadline_rate();
    let p_base = analytic::pi0(&base)?;
    let p_shift = analytic::pi0(&base.shifted(shift))?;
    Ok(stream.value() * a * p_base / ((a + shift) * p_shift))
}

/// Index computed by composing `s (v - dV)` with [`value_difference`].
pub fn priority_from_value_difference(stream: &StreamSpec, f: f64, l: usize) -> Result<f64> {
    let dv = value_difference(stream, f, l)?;
    Ok(stream.service_rate() * (stream.value() - dv))
}

/// Index `Z(l)` of `stream` under share `f`, in its closed form.
pub fn priority(stream: &StreamSpec, f: f64, l: usize) -> Result<f64> {
    check_args(f, l)?;
    let vs = stream.value() * stream.service_rate();
    let a = stream.service_rate() * f;
    if a == 0.0 {
        return Ok(vs);
    }
    let base = QueueParams::for_stream(stream, f)?;
    let p_base = analytic::pi0(&base)?;
    index_with_base(stream, &base, p_base, l)
}

fn index_with_base(stream: &StreamSpec, base: &QueueParams, p_base: f64, l: usize) -> Result<f64> {
    let vs = stream.value() * stream.service_rate();
    let a = base.service();
    if a == 0.0 {
        return Ok(vs);
    }
    let shifted = a + l as f64 * stream.deadline_rate();
    let p_shift = analytic::pi0(&base.shifted(l as f64 * stream.deadline_rate()))?;
    let z = vs * (1.0 - (a * p_base) / (shifted * p_shift));
    if !z.is_finite() {
        return Err(Error::Numerical(format!("non-finite index for stream {} at l={l}", stream.id())));
    }
    Ok(z)
}

fn check_args(f: f64, l: usize) -> Result<()> {
    if l == 0 {
        return Err(Error::InvalidParameter("priority is defined for l >= 1".into()));
    }
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::InvalidParameter(format!("allocation {f} outside [0, 1]")));
    }
    Ok(())
}

/// Precomputed indices `Z_i(l)` for `l = 1..=l_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorityTable {
    rows: Vec<Vec<f64>>,
    limits: Vec<f64>,
    allocation: AllocationVector,
}

impl PriorityTable {
    pub fn build(streams: &[StreamSpec], f: &AllocationVector, l_max: usize) -> Result<Self> {
        if l_max == 0 {
            return Err(Error::InvalidParameter("l_max must be at least 1".into()));
        }
        if streams.len() != f.len() {
            return Err(Error::DimensionMismatch { expected: streams.len(), found: f.len() });
        }
        let mut rows = Vec::with_capacity(streams.len());
        let mut limits = Vec::with_capacity(streams.len());
        for (stream, &fi) in streams.iter().zip(f.as_slice()) {
            let limit = stream.value() * stream.service_rate();
            let base = QueueParams::for_stream(stream, fi)?;
            // pi0 at the allocation point is shared by every entry of the row.
            let p_base = analytic::pi0(&base)?;
            let mut row = Vec::with_capacity(l_max);
            for l in 1..=l_max {
                let z = index_with_base(stream, &base, p_base, l)?;
                if let Some(&prev) = row.last() {
                    if z < prev - MONOTONE_SLACK * limit {
                        return Err(Error::Numerical(format!(
                            "index of stream {} decreases at l={l}: {prev} -> {z}",
                            stream.id()
                        )));
                    }
                }
                if z > limit * (1.0 + MONOTONE_SLACK) {
                    return Err(Error::Numerical(format!(
                        "index of stream {} exceeds v*s at l={l}",
                        stream.id()
                    )));
                }
                row.push(z);
            }
            rows.push(row);
            limits.push(limit);
        }
        Ok(Self { rows, limits, allocation: f.clone() })
    }

    pub fn streams(&self) -> usize {
        self.rows.len()
    }

    pub fn l_max(&self) -> usize {
        self.rows[0].len()
    }

    pub fn allocation(&self) -> &AllocationVector {
        &self.allocation
    }

    /// `v_i s_i`, the value of every index beyond the table.
    pub fn limit(&self, stream: usize) -> f64 {
        self.limits[stream]
    }

    /// `Z_stream(l)` for `l >= 1`.
    pub fn get(&self, stream: usize, l: usize) -> f64 {
        debug_assert!(l >= 1);
        self.rows[stream].get(l - 1).copied().unwrap_or(self.limits[stream])
    }

    /// Stream to serve given the current queue lengths: the nonempty queue
    /// with the largest index, lowest id on ties; `None` when all are empty.
    pub fn select(&self, queue_lengths: &[usize]) -> Option<usize> {
        debug_assert_eq!(queue_lengths.len(), self.rows.len());
        let mut best: Option<(usize, f64)> = None;
        for (i, &l) in queue_lengths.iter().enumerate() {
            if l == 0 {
                continue;
            }
            let z = self.get(i, l);
            if best.is_none_or(|(_, bz)| z > bz) {
                best = Some((i, z));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Rows as `(stream, l, z)` triples.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(k, &z)| (i, k + 1, z)))
    }
}
