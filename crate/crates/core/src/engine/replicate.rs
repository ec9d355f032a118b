use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::SimMetrics;
use crate::error::Result;
use crate::rng;

/// Sample mean with a Student-t 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub stddev: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { n, mean: f64::NAN, stddev: f64::NAN, ci95_lo: f64::NAN, ci95_hi: f64::NAN };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Self { n, mean, stddev: 0.0, ci95_lo: mean, ci95_hi: mean };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let stddev = var.sqrt();
        let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.975);
        let half = t * stddev / (n as f64).sqrt();
        Self { n, mean, stddev, ci95_lo: mean - half, ci95_hi: mean + half }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci95_lo <= x && x <= self.ci95_hi
    }

    pub fn overlaps(&self, other: &Estimate) -> bool {
        self.ci95_lo <= other.ci95_hi && other.ci95_lo <= self.ci95_hi
    }
}

/// Replications of one configuration and their summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub runs: Vec<SimMetrics>,
    pub revenue_rate: Estimate,
    pub epu: Estimate,
}

impl Summary {
    pub fn from_runs(runs: Vec<SimMetrics>) -> Self {
        let rates: Vec<f64> = runs.iter().map(|m| m.revenue_rate).collect();
        let epus: Vec<f64> = runs.iter().map(|m| m.epu).collect();
        Self { revenue_rate: Estimate::from_samples(&rates), epu: Estimate::from_samples(&epus), runs }
    }
}

/// Runs `run` once per replication, in parallel, with seeds derived from
/// `base_seed`. Replication `k` always receives the same seed, so two
/// policies replicated from the same base seed see common random numbers.
pub fn replicate<F>(base_seed: u64, n_reps: usize, run: F) -> Result<Summary>
where
    F: Fn(u64) -> Result<SimMetrics> + Sync,
{
    let runs = (0..n_reps)
        .into_par_iter()
        .map(|k| run(rng::replication_seed(base_seed, k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Summary::from_runs(runs))
}
