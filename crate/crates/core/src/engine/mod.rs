//! Simulation engines.
//!
//! [`run_ctmc`] simulates the joint queue-length Markov chain directly with
//! competing exponential clocks. [`run_trace`] replays a sampled job trace
//! event by event. [`replicate`] runs either over derived seeds and
//! summarizes the results.

mod ctmc;
mod events;
mod metrics;
mod replicate;
mod trace;

pub use events::{EventKind, EventLog, EventRecord};
pub use ctmc::run_ctmc;
pub use metrics::{SimMetrics, StreamMetrics};
pub use replicate::{replicate, Estimate, Summary};
pub use trace::{run_trace, run_trace_logged};
