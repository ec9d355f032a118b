//! CSV reporting.
//!
//! One row per simulated policy (`kind = revenue_rate`), one per solver
//! gain (`kind = gain`) and comparison rows against Policy Z:
//! `improvement_pct = 100 (V_Z - V_P) / V_P` for every other simulated
//! policy and `loss_pct = 100 (g - V_Z) / g` against the solver gain. In
//! comparison rows `mean` uses the replication means; `stddev` and the
//! interval come from the per-replication values, paired by seed.

use std::io::{Read, Write};

use anyhow::{bail, Result};
use revsched::engine::Estimate;
use serde::{Deserialize, Serialize};

use crate::runner::ExperimentResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    RevenueRate,
    Gain,
    ImprovementPct,
    LossPct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment: String,
    pub policy: String,
    pub kind: RowKind,
    pub n: usize,
    pub mean: f64,
    pub stddev: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
    pub epu: Option<f64>,
}

impl ReportRow {
    fn from_estimate(experiment: &str, policy: String, kind: RowKind, mean: f64, e: &Estimate) -> Self {
        Self {
            experiment: experiment.to_string(),
            policy,
            kind,
            n: e.n,
            mean,
            stddev: e.stddev,
            ci95_lo: e.ci95_lo,
            ci95_hi: e.ci95_hi,
            epu: None,
        }
    }
}

pub const POLICY_Z: &str = "policyz";

pub fn improvement_pct(v_z: f64, v_other: f64) -> f64 {
    100.0 * (v_z - v_other) / v_other
}

pub fn loss_pct(g: f64, v_z: f64) -> f64 {
    100.0 * (g - v_z) / g
}

pub fn report(results: &[ExperimentResult]) -> Result<Vec<ReportRow>> {
    if results.is_empty() {
        bail!("nothing to report");
    }
    let mut rows = Vec::new();
    for exp in results {
        let name = exp.experiment.as_str();
        for r in &exp.results {
            let e = &r.summary.revenue_rate;
            let mut row = ReportRow::from_estimate(name, r.policy.clone(), RowKind::RevenueRate, e.mean, e);
            row.epu = Some(r.summary.epu.mean);
            rows.push(row);
            if let Some(g) = r.oracle_gain {
                rows.push(ReportRow {
                    experiment: name.to_string(),
                    policy: format!("{}-oracle", r.policy),
                    kind: RowKind::Gain,
                    n: 1,
                    mean: g,
                    stddev: 0.0,
                    ci95_lo: g,
                    ci95_hi: g,
                    epu: None,
                });
            }
        }
        let Some(z) = exp.get(POLICY_Z) else { continue };
        let z_rates: Vec<f64> = z.summary.runs.iter().map(|m| m.revenue_rate).collect();
        let z_mean = z.summary.revenue_rate.mean;
        for other in exp.results.iter().filter(|r| r.policy != POLICY_Z) {
            if other.oracle_gain.is_none() && other.summary.runs.len() == z_rates.len() {
                let paired: Vec<f64> = z_rates
                    .iter()
                    .zip(&other.summary.runs)
                    .map(|(&vz, m)| improvement_pct(vz, m.revenue_rate))
                    .collect();
                let mean = improvement_pct(z_mean, other.summary.revenue_rate.mean);
                rows.push(ReportRow::from_estimate(
                    name,
                    format!("{POLICY_Z}-vs-{}", other.policy),
                    RowKind::ImprovementPct,
                    mean,
                    &Estimate::from_samples(&paired),
                ));
            }
            if let Some(g) = other.oracle_gain {
                let per_rep: Vec<f64> = z_rates.iter().map(|&vz| loss_pct(g, vz)).collect();
                rows.push(ReportRow::from_estimate(
                    name,
                    format!("{POLICY_Z}-vs-{}", other.policy),
                    RowKind::LossPct,
                    loss_pct(g, z_mean),
                    &Estimate::from_samples(&per_rep),
                ));
            }
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<Vec<ReportRow>, _>>()?)
}

pub fn to_csv_string(rows: &[ReportRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf)?)
}
