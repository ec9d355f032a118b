//! Turning configurations into replicated simulation results.

use anyhow::{bail, Context, Result};
use revsched::engine::{replicate, run_ctmc, run_trace, Summary};
use revsched::fap::{self, AllocationVector};
use revsched::policyz::PriorityTable;
use revsched::schedulers::{Edf, FractionalShares, IndexPolicy, QueuePolicy, Redf, Robust, TracePolicy, WeightedRoundRobin};
use revsched::sdp::{SdpModel, SdpSolution};
use revsched::workload::{DeadlineRule, StreamSpec, WorkloadSpec};

use crate::config::{Allocation, EngineKind, PolicyConfig};
use crate::presets::ExperimentPreset;

/// Replicated outcome of one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyResult {
    pub policy: String,
    pub summary: Summary,
    /// Optimal gain reported by the dynamic-programming solver.
    pub oracle_gain: Option<f64>,
}

/// All policies of one experiment, replicated on common seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub experiment: String,
    pub results: Vec<PolicyResult>,
}

impl ExperimentResult {
    pub fn get(&self, policy: &str) -> Option<&PolicyResult> {
        self.results.iter().find(|r| r.policy == policy)
    }
}

fn allocation(streams: &[StreamSpec], f: &Allocation) -> Result<AllocationVector> {
    match f {
        Allocation::Auto(_) => Ok(fap::optimize(streams, fap::DEFAULT_TOL)?.f_star),
        Allocation::Fixed(f) => Ok(f.clone()),
    }
}

/// A policy with its offline work (allocation search, index table, dynamic
/// program) already done.
enum Prepared {
    Edf,
    Redf,
    Robust { slack: f64, knowledge: revsched::schedulers::Knowledge },
    Fap { f: AllocationVector, quantum: f64 },
    Index(PriorityTable),
    Sdp(SdpSolution),
}

fn prepare(streams: &[StreamSpec], policy: &PolicyConfig) -> Result<Prepared> {
    policy.validate(streams.len())?;
    Ok(match policy {
        PolicyConfig::Edf => Prepared::Edf,
        PolicyConfig::Redf => Prepared::Redf,
        PolicyConfig::Robust { slack, knowledge } => Prepared::Robust { slack: *slack, knowledge: *knowledge },
        PolicyConfig::Fap { f, quantum } => {
            let means: Vec<f64> = streams.iter().map(|s| s.mean_exec()).collect();
            Prepared::Fap {
                f: allocation(streams, f)?,
                quantum: quantum.unwrap_or_else(|| WeightedRoundRobin::default_quantum(&means)),
            }
        }
        PolicyConfig::Policyz { f, l_max } => {
            Prepared::Index(PriorityTable::build(streams, &allocation(streams, f)?, *l_max)?)
        }
        PolicyConfig::Sdp { cap, tol, max_iters } => {
            let model = SdpModel::new(streams, *cap)?;
            let fstar = fap::optimize(streams, fap::DEFAULT_TOL)?.f_star;
            let tail = model.tail_mass_under(&fstar)?;
            if tail >= 1e-6 {
                eprintln!("warning: sdp cap {cap} leaves tail mass {tail:.3e} under the optimal allocation");
            }
            Prepared::Sdp(model.solve(*tol, *max_iters).context("solving the dynamic program")?)
        }
    })
}

impl Prepared {
    fn queue_policy(&self) -> Option<Box<dyn QueuePolicy + '_>> {
        match self {
            Prepared::Fap { f, .. } => Some(Box::new(FractionalShares(f.clone()))),
            Prepared::Index(t) => Some(Box::new(t.clone())),
            Prepared::Sdp(s) => Some(Box::new(s.clone())),
            _ => None,
        }
    }

    fn trace_policy(&self, streams: &[StreamSpec]) -> revsched::Result<Option<Box<dyn TracePolicy>>> {
        Ok(match self {
            Prepared::Edf => Some(Box::new(Edf)),
            Prepared::Redf => Some(Box::new(Redf::new())),
            Prepared::Robust { slack, knowledge } => Some(Box::new(Robust::new(streams, *slack, *knowledge)?)),
            Prepared::Fap { f, quantum } => Some(Box::new(WeightedRoundRobin::new(f.clone(), *quantum)?)),
            Prepared::Index(t) => Some(Box::new(IndexPolicy::new(t.clone()))),
            Prepared::Sdp(_) => None,
        })
    }

    fn oracle_gain(&self) -> Option<f64> {
        match self {
            Prepared::Sdp(s) => Some(s.gain),
            _ => None,
        }
    }
}

/// Replicates `policy` on `workload`. Replication `k` uses the same seed
/// for every policy run from the same `base_seed`.
pub fn run_policy(
    workload: &WorkloadSpec,
    policy: &PolicyConfig,
    engine: EngineKind,
    replications: usize,
    base_seed: u64,
) -> Result<PolicyResult> {
    if replications == 0 {
        bail!("replications must be at least 1");
    }
    let streams = workload.streams();
    let prepared = prepare(streams, policy)?;
    let horizon = workload.horizon();
    let summary = match engine {
        EngineKind::Ctmc => {
            if workload.deadline_rule() != DeadlineRule::Exponential {
                bail!("the ctmc engine needs exponential deadlines");
            }
            let Some(q) = prepared.queue_policy() else {
                bail!("policy {} needs the trace engine", policy.label());
            };
            replicate(base_seed, replications, |seed| run_ctmc(streams, q.as_ref(), horizon, seed))?
        }
        EngineKind::Trace => {
            if prepared.trace_policy(streams)?.is_none() {
                bail!("policy {} needs the ctmc engine", policy.label());
            }
            replicate(base_seed, replications, |seed| {
                let trace = workload.clone().with_seed(seed).sample_trace();
                let mut p = prepared.trace_policy(streams)?.expect("checked above");
                run_trace(&trace, streams.len(), p.as_mut(), horizon)
            })?
        }
    };
    Ok(PolicyResult { policy: policy.label().to_string(), summary, oracle_gain: prepared.oracle_gain() })
}

/// Runs every policy of `preset` on common seeds.
pub fn run_preset(preset: &ExperimentPreset) -> Result<ExperimentResult> {
    let seed = preset.workload.seed();
    let results = preset
        .policies
        .iter()
        .map(|p| {
            run_policy(&preset.workload, p, preset.engine, preset.replications, seed)
                .with_context(|| format!("{}: policy {}", preset.id, p.label()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult { experiment: preset.id.clone(), results })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{preset_redf, preset_table1, Overrides, RewardModel};

    #[test]
    fn engine_and_policy_must_match() {
        let w = preset_table1("E1").unwrap().workload.with_horizon(1e4).unwrap();
        assert!(run_policy(&w, &PolicyConfig::Edf, EngineKind::Ctmc, 2, 1).is_err());
        assert!(run_policy(&w, &PolicyConfig::sdp(), EngineKind::Trace, 2, 1).is_err());
        let prop = w.clone().with_deadline_rule(DeadlineRule::Proportional);
        assert!(run_policy(&prop, &PolicyConfig::fap(), EngineKind::Ctmc, 2, 1).is_err());
        assert!(run_policy(&w, &PolicyConfig::fap(), EngineKind::Ctmc, 0, 1).is_err());
    }

    #[test]
    fn same_seed_same_result() {
        let o = Overrides { horizon: Some(2e4), replications: Some(3), ..Default::default() };
        let p = preset_redf(RewardModel::Linear, 2.0).unwrap().with_overrides(&o).unwrap();
        let a = run_preset(&p).unwrap();
        let b = run_preset(&p).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.results.len(), 2);
        assert!(a.get("policyz").is_some() && a.get("redf").is_some());
    }

    #[test]
    fn sdp_reports_its_gain() {
        let o = Overrides { horizon: Some(1e4), replications: Some(2), ..Default::default() };
        let p = preset_table1("E1").unwrap().with_overrides(&o).unwrap();
        let r = run_preset(&p).unwrap();
        let g = r.get("sdp").unwrap().oracle_gain.unwrap();
        assert!((g / 0.00159905 - 1.0).abs() < 1e-4);
        assert!(r.get("fap").unwrap().oracle_gain.is_none());
    }
}
