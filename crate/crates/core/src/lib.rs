//! Revenue-maximizing scheduling of overloaded soft real-time job streams.
//!
//! Each stream delivers Poisson arrivals with exponential execution times
//! and exponential relative deadlines; a job that misses its deadline is
//! dropped and earns nothing. The crate provides:
//!
//! * [`workload`]: stream parameters and reproducible trace sampling.
//! * [`analytic`]: the birth-death queue with reneging and its revenue.
//! * [`fap`]: the optimal fractional allocation of the processor.
//! * [`policyz`]: the queue-length priority index built on that allocation.
//! * [`schedulers`]: EDF, REDF, ROBUST, fractional and index policies.
//! * [`engine`]: CTMC and trace-driven simulation plus replication.
//! * [`sdp`]: the average-reward optimal policy for two streams.
//!
//! ```
//! use revsched::{analytic, fap, policyz, workload::StreamSpec};
//!
//! let streams = vec![
//!     StreamSpec::with_interarrival(0, 350.0, 600.0, 1000.0, 1.0).unwrap(),
//!     StreamSpec::with_interarrival(1, 350.0, 600.0, 1000.0, 1.0).unwrap(),
//! ];
//! let best = fap::optimize(&streams, fap::DEFAULT_TOL).unwrap();
//! assert!((best.f_star[0] - 0.5).abs() < 1e-3);
//!
//! let table = policyz::PriorityTable::build(&streams, &best.f_star, 64).unwrap();
//! assert_eq!(table.select(&[3, 1]), Some(0));
//! # let _ = analytic::pi0;
//! ```

pub mod analytic;
pub mod engine;
pub mod error;
pub mod fap;
pub mod policyz;
pub mod rng;
pub mod schedulers;
pub mod sdp;
pub mod workload;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/workloads.md")]
    mod workloads {}
    #[doc = include_str!("../../../book/src/queue.md")]
    mod queue {}
    #[doc = include_str!("../../../book/src/allocation.md")]
    mod allocation {}
    #[doc = include_str!("../../../book/src/policyz.md")]
    mod policyz {}
    #[doc = include_str!("../../../book/src/schedulers.md")]
    mod schedulers {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/sdp.md")]
    mod sdp {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
