//! Experiment presets for the published campaigns.

use anyhow::{bail, Result};
use revsched::schedulers::Knowledge;
use revsched::workload::{DeadlineRule, StreamSpec, WorkloadSpec};

use crate::config::{EngineKind, PolicyConfig};

pub const DEFAULT_SEED: u64 = 1;

/// Intensities swept by the robust and redf campaigns.
pub const SWEEP: [f64; 5] = [1.2, 1.5, 2.0, 3.0, 4.0];

/// One row of the two-stream comparison table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub id: &'static str,
    pub deadline: f64,
    pub e1: f64,
    pub e2: f64,
    pub v1: f64,
    /// Published optimal share of stream 1.
    pub f1: f64,
}

const fn row(id: &'static str, deadline: f64, e1: f64, e2: f64, v1: f64, f1: f64) -> Table1Row {
    Table1Row { id, deadline, e1, e2, v1, f1 }
}

pub const TABLE1: [Table1Row; 15] = [
    row("E1", 1000.0, 600.0, 600.0, 1.0, 0.50),
    row("E2", 1000.0, 620.0, 725.0, 1.1, 0.54),
    row("E3", 1000.0, 580.0, 790.0, 1.2, 0.57),
    row("E4", 1000.0, 545.0, 855.0, 1.3, 0.61),
    row("E5", 1000.0, 520.0, 925.0, 1.4, 0.64),
    row("E6", 1000.0, 500.0, 1010.0, 1.5, 0.67),
    row("E7", 500.0, 610.0, 735.0, 1.1, 0.55),
    row("E8", 500.0, 530.0, 900.0, 1.3, 0.63),
    row("E9", 500.0, 475.0, 1110.0, 1.5, 0.70),
    row("E10", 250.0, 590.0, 765.0, 1.1, 0.56),
    row("E11", 250.0, 495.0, 1020.0, 1.3, 0.67),
    row("E12", 250.0, 435.0, 1430.0, 1.5, 0.77),
    row("E13", 165.0, 575.0, 785.0, 1.1, 0.58),
    row("E14", 165.0, 465.0, 1170.0, 1.3, 0.72),
    row("E15", 165.0, 400.0, 2000.0, 1.5, 0.84),
];

pub const TABLE1_INTERARRIVAL: f64 = 350.0;
pub const TABLE1_HORIZON: f64 = 900_000.0;
pub const TABLE1_REPS: usize = 20;
pub const SUITE_HORIZON: f64 = 1_000_000.0;
pub const SUITE_REPS: usize = 50;

pub const ROBUST_EXECS: [f64; 4] = [50.0, 100.0, 200.0, 400.0];
pub const REDF_EXECS: [f64; 4] = [150.0, 100.0, 200.0, 400.0];
pub const REDF_DEADLINES: [f64; 4] = [600.0, 800.0, 1600.0, 3200.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardModel {
    Random,
    Linear,
}

impl RewardModel {
    pub fn rewards(self) -> [f64; 4] {
        match self {
            Self::Random => [150.0, 300.0, 400.0, 200.0],
            Self::Linear => [450.0, 300.0, 200.0, 100.0],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Random => "random",
            Self::Linear => "linear",
        }
    }
}

impl std::str::FromStr for RewardModel {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Self::Random),
            "linear" => Ok(Self::Linear),
            other => bail!("unknown reward model {other:?}"),
        }
    }
}

/// A fully specified experiment: one workload, the policies compared on it
/// and how long and how often to run them.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPreset {
    pub id: String,
    pub workload: WorkloadSpec,
    pub policies: Vec<PolicyConfig>,
    pub engine: EngineKind,
    pub replications: usize,
}

/// Command-line adjustments applied on top of a preset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replications: Option<usize>,
    pub horizon: Option<f64>,
    pub deadline_rule: Option<DeadlineRule>,
}

impl ExperimentPreset {
    pub fn with_overrides(mut self, o: &Overrides) -> Result<Self> {
        if let Some(seed) = o.seed {
            self.workload = self.workload.with_seed(seed);
        }
        if let Some(h) = o.horizon {
            self.workload = self.workload.with_horizon(h)?;
        }
        if let Some(rule) = o.deadline_rule {
            self.workload = self.workload.with_deadline_rule(rule);
        }
        if let Some(n) = o.replications {
            if n == 0 {
                bail!("replications must be at least 1");
            }
            self.replications = n;
        }
        Ok(self)
    }
}

pub fn table1_row(id: &str) -> Result<&'static Table1Row> {
    match TABLE1.iter().find(|r| r.id.eq_ignore_ascii_case(id)) {
        Some(r) => Ok(r),
        None => bail!("unknown experiment id {id:?}; expected E1..E15"),
    }
}

pub fn table1_streams(row: &Table1Row) -> Result<Vec<StreamSpec>> {
    let p = TABLE1_INTERARRIVAL;
    Ok(vec![
        StreamSpec::with_interarrival(0, p, row.e1, row.deadline, row.v1)?,
        StreamSpec::with_interarrival(1, p, row.e2, row.deadline, 1.0)?,
    ])
}

pub fn preset_table1(id: &str) -> Result<ExperimentPreset> {
    let row = table1_row(id)?;
    Ok(ExperimentPreset {
        id: row.id.to_string(),
        workload: WorkloadSpec::new(table1_streams(row)?, TABLE1_HORIZON, DEFAULT_SEED)?,
        policies: vec![PolicyConfig::fap(), PolicyConfig::policyz(), PolicyConfig::sdp()],
        engine: EngineKind::Ctmc,
        replications: TABLE1_REPS,
    })
}

fn check_intensity(intensity: f64) -> Result<()> {
    if !(intensity > 0.0 && intensity.is_finite()) {
        bail!("intensity must be > 0, got {intensity}");
    }
    Ok(())
}

/// Common per-stream rate giving total utilization `intensity`.
pub fn common_rate(execs: &[f64], intensity: f64) -> f64 {
    intensity / execs.iter().sum::<f64>()
}

pub fn preset_robust(slack: f64, intensity: f64, knowledge: Knowledge) -> Result<ExperimentPreset> {
    if !(slack > 1.0 && slack.is_finite()) {
        bail!("slack must exceed 1, got {slack}");
    }
    check_intensity(intensity)?;
    let r = common_rate(&ROBUST_EXECS, intensity);
    let streams = ROBUST_EXECS
        .iter()
        .enumerate()
        .map(|(i, &e)| StreamSpec::new(i, r, e, slack * e, e))
        .collect::<revsched::Result<Vec<_>>>()?;
    let tag = match knowledge {
        Knowledge::Exact => "exact",
        Knowledge::Mean => "mean",
    };
    Ok(ExperimentPreset {
        id: format!("robust-s{slack}-{tag}-i{intensity}"),
        workload: WorkloadSpec::new(streams, SUITE_HORIZON, DEFAULT_SEED)?,
        policies: vec![PolicyConfig::policyz(), PolicyConfig::Robust { slack, knowledge }],
        engine: EngineKind::Trace,
        replications: SUITE_REPS,
    })
}

pub fn preset_redf(model: RewardModel, intensity: f64) -> Result<ExperimentPreset> {
    check_intensity(intensity)?;
    let r = common_rate(&REDF_EXECS, intensity);
    let rewards = model.rewards();
    let streams = (0..4)
        .map(|i| StreamSpec::new(i, r, REDF_EXECS[i], REDF_DEADLINES[i], rewards[i]))
        .collect::<revsched::Result<Vec<_>>>()?;
    Ok(ExperimentPreset {
        id: format!("redf-{}-i{intensity}", model.as_str()),
        workload: WorkloadSpec::new(streams, SUITE_HORIZON, DEFAULT_SEED)?,
        policies: vec![PolicyConfig::policyz(), PolicyConfig::Redf],
        engine: EngineKind::Trace,
        replications: SUITE_REPS,
    })
}
