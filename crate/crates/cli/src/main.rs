use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use revsched::analytic;
use revsched::fap;
use revsched::policyz::{PriorityTable, DEFAULT_L_MAX};
use revsched::schedulers::Knowledge;
use revsched::sdp::{Action, SdpModel, DEFAULT_CAP, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use revsched::workload::{DeadlineRule, WorkloadSpec};
use revsched_cli::config::{load_workload, Allocation};
use revsched_cli::presets::{self, Overrides, RewardModel, SWEEP, TABLE1};
use revsched_cli::{report, run_policy, run_preset, write_csv, ExperimentPreset, RunConfig};

#[derive(Parser)]
#[command(name = "revsched", version, about = "Revenue-maximizing scheduling of overloaded job streams")]
struct Cli {
    /// How job deadlines are drawn in trace simulations.
    #[arg(long, global = true, value_parser = parse_rule)]
    deadline_rule: Option<DeadlineRule>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal fractional allocation of a workload.
    Fap {
        workload: PathBuf,
        #[arg(long, default_value_t = fap::DEFAULT_TOL)]
        tol: f64,
    },
    /// Priority index table of a workload.
    Ztable {
        workload: PathBuf,
        #[arg(long, default_value_t = DEFAULT_L_MAX)]
        lmax: usize,
        /// Allocation the index is built on: `auto` or comma-separated shares.
        #[arg(long, default_value = "auto")]
        f: Allocation,
    },
    /// Replicated simulation described by a run configuration.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimal two-stream policy by dynamic programming.
    Sdp {
        workload: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
        max_iters: usize,
        /// Also print the action of every state.
        #[arg(long)]
        policy: bool,
    },
    /// Preset experiment campaigns.
    Experiment {
        which: Which,
        /// Table rows to run, e.g. `E1,E7`.
        #[arg(long, value_delimiter = ',')]
        ids: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        intensity: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [2.0, 4.0])]
        slack: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values = ["exact", "mean"], value_parser = parse_knowledge)]
        knowledge: Vec<Knowledge>,
        #[arg(long, value_delimiter = ',', default_values = ["random", "linear"], value_parser = parse_model)]
        model: Vec<RewardModel>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Table1,
    Robust,
    Redf,
    AllTable1,
}

fn parse_rule(s: &str) -> Result<DeadlineRule, String> {
    s.parse().map_err(|e: revsched::Error| e.to_string())
}

fn parse_knowledge(s: &str) -> Result<Knowledge, String> {
    s.parse().map_err(|e: revsched::Error| e.to_string())
}

fn parse_model(s: &str) -> Result<RewardModel, String> {
    s.parse().map_err(|e: anyhow::Error| e.to_string())
}

fn output(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn warn_if_underloaded(w: &WorkloadSpec) {
    if !w.is_overloaded() {
        eprintln!(
            "warning: utilization {:.4} <= 1; the workload is not overloaded and EDF is the prescribed policy",
            w.utilization()
        );
    }
}

fn cmd_fap(path: &Path, tol: f64) -> Result<()> {
    let w = load_workload(path)?;
    warn_if_underloaded(&w);
    let res = fap::optimize(w.streams(), tol)?;
    let mut csv = csv::Writer::from_writer(io::stdout().lock());
    csv.write_record(["stream", "f", "revenue_rate"])?;
    for (s, &f) in w.streams().iter().zip(res.f_star.as_slice()) {
        csv.write_record([s.id().to_string(), f.to_string(), analytic::stream_revenue(s, f)?.to_string()])?;
    }
    csv.write_record(["total".to_string(), "1".to_string(), res.v_star.to_string()])?;
    csv.flush()?;
    Ok(())
}

fn cmd_ztable(path: &Path, lmax: usize, f: &Allocation) -> Result<()> {
    let w = load_workload(path)?;
    let f = match f {
        Allocation::Auto(_) => fap::optimize(w.streams(), fap::DEFAULT_TOL)?.f_star,
        Allocation::Fixed(f) => f.clone(),
    };
    let table = PriorityTable::build(w.streams(), &f, lmax)?;
    let mut csv = csv::Writer::from_writer(BufWriter::new(io::stdout().lock()));
    csv.write_record(["stream", "l", "z"])?;
    for (stream, l, z) in table.entries() {
        csv.write_record([stream.to_string(), l.to_string(), z.to_string()])?;
    }
    csv.flush()?;
    Ok(())
}

fn cmd_simulate(path: &Path, out: Option<&Path>, rule: Option<DeadlineRule>) -> Result<()> {
    let cfg = RunConfig::load(path)?;
    let mut w = cfg.resolve_workload()?;
    if let Some(rule) = rule {
        w = w.with_deadline_rule(rule);
    }
    warn_if_underloaded(&w);
    let result = run_policy(&w, &cfg.policy, cfg.engine, cfg.replications, cfg.base_seed(&w))?;
    let exp = revsched_cli::ExperimentResult { experiment: "simulate".into(), results: vec![result] };
    let out = out.or(cfg.out.as_deref());
    write_csv(&report(&[exp])?, output(out)?)
}

fn cmd_sdp(path: &Path, cap: usize, tol: f64, max_iters: usize, policy: bool) -> Result<()> {
    let w = load_workload(path)?;
    let sol = SdpModel::new(w.streams(), cap)?.solve(tol, max_iters)?;
    let mut csv = csv::Writer::from_writer(BufWriter::new(io::stdout().lock()));
    csv.write_record(["gain", "iterations", "cap"])?;
    csv.write_record([sol.gain.to_string(), sol.iterations.to_string(), cap.to_string()])?;
    csv.flush()?;
    if policy {
        let mut csv = csv::WriterBuilder::new().from_writer(BufWriter::new(io::stdout().lock()));
        csv.write_record(["l1", "l2", "action"])?;
        for (l1, l2, a) in sol.entries() {
            let action = match a {
                Action::Idle => "idle".to_string(),
                Action::Serve(i) => format!("serve-{}", i + 1),
            };
            csv.write_record([l1.to_string(), l2.to_string(), action])?;
        }
        csv.flush()?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn experiment_presets(
    which: Which,
    ids: &[String],
    intensity: &[f64],
    slack: &[f64],
    knowledge: &[Knowledge],
    model: &[RewardModel],
) -> Result<Vec<ExperimentPreset>> {
    let grid: &[f64] = if intensity.is_empty() { &SWEEP } else { intensity };
    let mut out = Vec::new();
    match which {
        Which::Table1 | Which::AllTable1 => {
            let all: Vec<String> = TABLE1.iter().map(|r| r.id.to_string()).collect();
            let chosen = if matches!(which, Which::AllTable1) || ids.is_empty() { &all } else { ids };
            for id in chosen {
                out.push(presets::preset_table1(id)?);
            }
        }
        Which::Robust => {
            for &s in slack {
                for &k in knowledge {
                    for &i in grid {
                        out.push(presets::preset_robust(s, i, k)?);
                    }
                }
            }
        }
        Which::Redf => {
            for &m in model {
                for &i in grid {
                    out.push(presets::preset_redf(m, i)?);
                }
            }
        }
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fap { workload, tol } => cmd_fap(&workload, tol),
        Command::Ztable { workload, lmax, f } => cmd_ztable(&workload, lmax, &f),
        Command::Simulate { config, out } => cmd_simulate(&config, out.as_deref(), cli.deadline_rule),
        Command::Sdp { workload, cap, tol, max_iters, policy } => cmd_sdp(&workload, cap, tol, max_iters, policy),
        Command::Experiment { which, ids, intensity, slack, knowledge, model, seed, reps, horizon, out } => {
            let overrides = Overrides { seed, replications: reps, horizon, deadline_rule: cli.deadline_rule };
            let presets = experiment_presets(which, &ids, &intensity, &slack, &knowledge, &model)?;
            let mut results = Vec::with_capacity(presets.len());
            for p in presets {
                let p = p.with_overrides(&overrides)?;
                eprintln!("running {} ({} replications)", p.id, p.replications);
                results.push(run_preset(&p)?);
            }
            write_csv(&report(&results)?, output(out.as_deref())?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
