//! Run configuration files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use revsched::fap::AllocationVector;
use revsched::schedulers::Knowledge;
use revsched::sdp;
use revsched::workload::WorkloadSpec;
use serde::{Deserialize, Serialize};

/// Which simulator drives a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    /// Queue-length Markov chain; only queue-length policies.
    Ctmc,
    /// Event-driven replay of sampled job traces.
    #[default]
    Trace,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    #[default]
    Auto,
}

/// A processor allocation: computed by the optimizer, or given explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Allocation {
    Auto(AutoTag),
    Fixed(AllocationVector),
}

impl Default for Allocation {
    fn default() -> Self {
        Self::Auto(AutoTag::Auto)
    }
}

impl std::str::FromStr for Allocation {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Self::default());
        }
        let f = s
            .split(',')
            .map(|x| x.trim().parse::<f64>().with_context(|| format!("bad allocation entry {x:?}")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::Fixed(AllocationVector::new(f)?))
    }
}

fn default_slack() -> f64 {
    2.0
}
fn default_knowledge() -> Knowledge {
    Knowledge::Exact
}
fn default_l_max() -> usize {
    revsched::policyz::DEFAULT_L_MAX
}
fn default_cap() -> usize {
    sdp::DEFAULT_CAP
}
fn default_sdp_tol() -> f64 {
    sdp::DEFAULT_TOL
}
fn default_max_iters() -> usize {
    sdp::DEFAULT_MAX_ITERS
}

/// A policy and its parameters, tagged by `"name"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum PolicyConfig {
    Edf,
    Redf,
    Robust {
        #[serde(default = "default_slack")]
        slack: f64,
        #[serde(default = "default_knowledge")]
        knowledge: Knowledge,
    },
    Fap {
        #[serde(default)]
        f: Allocation,
        /// Round-robin quantum in the trace engine; defaults to 1% of the
        /// shortest mean execution time.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quantum: Option<f64>,
    },
    Policyz {
        #[serde(default)]
        f: Allocation,
        #[serde(default = "default_l_max")]
        l_max: usize,
    },
    Sdp {
        #[serde(default = "default_cap")]
        cap: usize,
        #[serde(default = "default_sdp_tol")]
        tol: f64,
        #[serde(default = "default_max_iters")]
        max_iters: usize,
    },
}

impl PolicyConfig {
    pub fn policyz() -> Self {
        Self::Policyz { f: Allocation::default(), l_max: default_l_max() }
    }

    pub fn fap() -> Self {
        Self::Fap { f: Allocation::default(), quantum: None }
    }

    pub fn sdp() -> Self {
        Self::Sdp { cap: default_cap(), tol: default_sdp_tol(), max_iters: default_max_iters() }
    }

    /// Label used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            Self::Edf => "edf",
            Self::Redf => "redf",
            Self::Robust { knowledge: Knowledge::Exact, .. } => "robust",
            Self::Robust { knowledge: Knowledge::Mean, .. } => "robust-mean",
            Self::Fap { .. } => "fap",
            Self::Policyz { .. } => "policyz",
            Self::Sdp { .. } => "sdp",
        }
    }

    pub fn validate(&self, n_streams: usize) -> Result<()> {
        match self {
            Self::Robust { slack, .. } if !(*slack > 1.0 && slack.is_finite()) => {
                bail!("robust slack must exceed 1, got {slack}")
            }
            Self::Fap { quantum: Some(q), .. } if !(*q > 0.0 && q.is_finite()) => {
                bail!("fap quantum must be > 0, got {q}")
            }
            Self::Fap { f: Allocation::Fixed(f), .. } | Self::Policyz { f: Allocation::Fixed(f), .. }
                if f.len() != n_streams =>
            {
                bail!("allocation has {} entries for {n_streams} streams", f.len())
            }
            Self::Policyz { l_max: 0, .. } => bail!("l_max must be at least 1"),
            Self::Sdp { .. } if n_streams != 2 => bail!("sdp needs exactly two streams, got {n_streams}"),
            Self::Sdp { cap: 0, .. } => bail!("sdp cap must be at least 1"),
            Self::Sdp { tol, .. } if !(*tol > 0.0) => bail!("sdp tolerance must be > 0, got {tol}"),
            _ => Ok(()),
        }
    }
}

/// Workload given inline or as a path to a workload file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WorkloadSource {
    File { file: PathBuf },
    Inline(WorkloadSpec),
}

/// Contents of a `simulate` configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub workload: WorkloadSource,
    pub policy: PolicyConfig,
    #[serde(default)]
    pub engine: EngineKind,
    /// Overrides the workload's horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default = "one")]
    pub replications: usize,
    /// Base seed for replications; defaults to the workload's seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn one() -> usize {
    1
}

pub fn load_workload(path: &Path) -> Result<WorkloadSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    WorkloadSpec::from_json(&text).with_context(|| format!("parsing workload {}", path.display()))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads a configuration; relative workload paths resolve against the
    /// configuration's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
        if let WorkloadSource::File { file } = &mut cfg.workload {
            if file.is_relative() {
                if let Some(dir) = path.parent() {
                    *file = dir.join(&*file);
                }
            }
        }
        Ok(cfg)
    }

    /// The workload with horizon override applied, validated against the
    /// policy.
    pub fn resolve_workload(&self) -> Result<WorkloadSpec> {
        let mut w = match &self.workload {
            WorkloadSource::Inline(w) => w.clone(),
            WorkloadSource::File { file } => load_workload(file)?,
        };
        if let Some(h) = self.horizon {
            w = w.with_horizon(h)?;
        }
        if self.replications == 0 {
            bail!("replications must be at least 1");
        }
        self.policy.validate(w.streams().len())?;
        Ok(w)
    }

    pub fn base_seed(&self, workload: &WorkloadSpec) -> u64 {
        self.seed.unwrap_or(workload.seed())
    }
}
