//! Configuration, experiment presets and reporting behind the `revsched`
//! command-line tool.

pub mod config;
pub mod presets;
pub mod report;
pub mod runner;

pub use config::{Allocation, EngineKind, PolicyConfig, RunConfig, WorkloadSource};
pub use presets::{preset_redf, preset_robust, preset_table1, ExperimentPreset, Overrides, RewardModel};
pub use report::{read_csv, report, write_csv, ReportRow, RowKind};
pub use runner::{run_policy, run_preset, ExperimentResult, PolicyResult};
