//! Optimal fractional allocation: the static processor split that
//! maximizes the summed stream revenue over the probability simplex.
//!
//! Two streams reduce to a scan of `f_1` on `[0, 1]`: a 101-point grid picks
//! the bracket, golden-section search refines it. More streams use a compass
//! pattern search on the simplex (mass moved between pairs of coordinates,
//! step expanded on success and halved on failure) from ten deterministic
//! starts.

use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::error::{Error, Result};
use crate::workload::StreamSpec;

/// Simplex tolerance on `sum(f) == 1`.
pub const SIMPLEX_TOL: f64 = 1e-12;
/// Default allocation tolerance of [`optimize`].
pub const DEFAULT_TOL: f64 = 1e-3;

const GRID_POINTS: usize = 101;
const MAX_STARTS: usize = 10;

/// A point on the probability simplex: the processor share of each stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct AllocationVector(Vec<f64>);

impl AllocationVector {
    pub fn new(f: Vec<f64>) -> Result<Self> {
        if f.is_empty() {
            return Err(Error::InvalidParameter("empty allocation".into()));
        }
        if f.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidParameter(format!("negative or non-finite share in {f:?}")));
        }
        let sum: f64 = f.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidParameter(format!("shares sum to {sum}, not 1")));
        }
        // Rounding can push a share a few ulps above 1.
        Ok(Self(f.into_iter().map(|x| x.min(1.0)).collect()))
    }

    /// Rescales nonnegative weights onto the simplex.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) || weights.iter().any(|x| *x < 0.0) {
            return Err(Error::InvalidParameter(format!("cannot normalize {weights:?}")));
        }
        Self::new(weights.into_iter().map(|x| x / sum).collect())
    }

    /// Everything to one stream.
    pub fn vertex(n: usize, i: usize) -> Self {
        let mut f = vec![0.0; n];
        f[i] = 1.0;
        Self(f)
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for AllocationVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for AllocationVector {
    type Error = Error;
    fn try_from(f: Vec<f64>) -> Result<Self> {
        Self::new(f)
    }
}

impl From<AllocationVector> for Vec<f64> {
    fn from(f: AllocationVector) -> Self {
        f.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FapResult {
    pub f_star: AllocationVector,
    pub v_star: f64,
    /// Number of revenue evaluations spent.
    pub evaluations: usize,
}

/// Tracks the best probe seen so far.
struct Search<'a> {
    streams: &'a [StreamSpec],
    evaluations: usize,
    best: Option<(Vec<f64>, f64)>,
}

impl<'a> Search<'a> {
    fn new(streams: &'a [StreamSpec]) -> Self {
        Self { streams, evaluations: 0, best: None }
    }

    fn eval(&mut self, f: &[f64]) -> Result<f64> {
        self.evaluations += 1;
        let v = analytic::total_revenue(self.streams, f)?;
        let replace = match &self.best {
            None => true,
            Some((bf, bv)) => better(f, v, bf, *bv),
        };
        if replace {
            self.best = Some((f.to_vec(), v));
        }
        Ok(v)
    }

    fn finish(self) -> Result<FapResult> {
        let (f, _) = self.best.expect("at least one probe");
        let f_star = AllocationVector::normalized(f)?;
        let v_star = analytic::total_revenue(self.streams, f_star.as_slice())?;
        Ok(FapResult { f_star, v_star, evaluations: self.evaluations })
    }
}

/// Higher revenue wins; equal revenue goes to the lexicographically smaller point.
fn better(f: &[f64], v: f64, g: &[f64], w: f64) -> bool {
    v > w || (v == w && f.iter().zip(g).find(|(a, b)| a != b).is_some_and(|(a, b)| a < b))
}

/// Finds the revenue-maximizing fractional allocation for `streams`.
pub fn optimize(streams: &[StreamSpec], tol: f64) -> Result<FapResult> {
    if streams.is_empty() {
        return Err(Error::InvalidParameter("no streams".into()));
    }
    if !(tol > 0.0 && tol <= 0.1) {
        return Err(Error::InvalidParameter(format!("allocation tolerance {tol} outside (0, 0.1]")));
    }
    match streams.len() {
        1 => {
            let f_star = AllocationVector::vertex(1, 0);
            let v_star = analytic::total_revenue(streams, f_star.as_slice())?;
            Ok(FapResult { f_star, v_star, evaluations: 1 })
        }
        2 => optimize_pair(streams, tol),
        _ => optimize_simplex(streams, tol),
    }
}

fn optimize_pair(streams: &[StreamSpec], tol: f64) -> Result<FapResult> {
    let mut search = Search::new(streams);
    let point = |x: f64| [x, 1.0 - x];

    let mut grid = Vec::with_capacity(GRID_POINTS);
    for k in 0..GRID_POINTS {
        let x = k as f64 / (GRID_POINTS - 1) as f64;
        grid.push(search.eval(&point(x))?);
    }
    let peaks = (0..GRID_POINTS)
        .filter(|&k| {
            (k == 0 || grid[k] > grid[k - 1]) && (k + 1 == GRID_POINTS || grid[k] >= grid[k + 1])
        })
        .count();
    if peaks > 1 {
        log::warn!("allocation revenue has {peaks} local maxima on the f1 grid");
    }
    let best_k = (0..GRID_POINTS).fold(0, |b, k| if grid[k] > grid[b] { k } else { b });
    let step = 1.0 / (GRID_POINTS - 1) as f64;
    let mut lo = (best_k as f64 - 1.0).max(0.0) * step;
    let mut hi = (best_k as f64 + 1.0).min((GRID_POINTS - 1) as f64) * step;

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut v1 = search.eval(&point(x1))?;
    let mut v2 = search.eval(&point(x2))?;
    while hi - lo > tol {
        if v1 >= v2 {
            hi = x2;
            x2 = x1;
            v2 = v1;
            x1 = hi - inv_phi * (hi - lo);
            v1 = search.eval(&point(x1))?;
        } else {
            lo = x1;
            x1 = x2;
            v1 = v2;
            x2 = lo + inv_phi * (hi - lo);
            v2 = search.eval(&point(x2))?;
        }
    }
    search.eval(&point(0.5 * (lo + hi)))?;
    search.finish()
}

fn starting_points(streams: &[StreamSpec]) -> Vec<Vec<f64>> {
    let n = streams.len();
    let mut starts: Vec<Vec<f64>> = Vec::new();
    let mut push = |f: Vec<f64>| {
        let sum: f64 = f.iter().sum();
        let f: Vec<f64> = f.into_iter().map(|x| x / sum).collect();
        if starts.len() < MAX_STARTS && !starts.contains(&f) {
            starts.push(f);
        }
    };
    push(vec![1.0; n]);
    push(streams.iter().map(StreamSpec::utilization).collect());
    push(streams.iter().map(|s| s.value() * s.service_rate()).collect());
    push(streams.iter().map(|s| s.value() * s.rate()).collect());
    for i in 0..n {
        push(AllocationVector::vertex(n, i).0);
    }
    for i in 0..n {
        let mut f = vec![0.0; n];
        f[i] = 1.0;
        f[(i + 1) % n] = 1.0;
        push(f);
    }
    starts
}

fn optimize_simplex(streams: &[StreamSpec], tol: f64) -> Result<FapResult> {
    let n = streams.len();
    let mut search = Search::new(streams);
    let mut optima: Vec<(Vec<f64>, f64)> = Vec::new();

    for start in starting_points(streams) {
        let mut f = start;
        let mut v = search.eval(&f)?;
        let mut h = 0.25;
        while h >= tol {
            let mut improved = false;
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    // Move mass from j to i, doubling the step while it pays.
                    let mut step = h;
                    loop {
                        let moved = step.min(f[j]);
                        if moved <= 0.0 {
                            break;
                        }
                        let mut cand = f.clone();
                        cand[i] = (cand[i] + moved).min(1.0);
                        cand[j] = (cand[j] - moved).max(0.0);
                        let cv = search.eval(&cand)?;
                        if cv > v {
                            f = cand;
                            v = cv;
                            improved = true;
                            step *= 2.0;
                        } else {
                            break;
                        }
                    }
                }
            }
            if !improved {
                h /= 2.0;
            }
        }
        optima.push((f, v));
    }

    let distinct = distinct_optima(&optima, tol);
    if distinct > 1 {
        log::warn!("pattern search found {distinct} distinct local optima");
    }
    search.finish()
}

fn distinct_optima(optima: &[(Vec<f64>, f64)], tol: f64) -> usize {
    let mut reps: Vec<&Vec<f64>> = Vec::new();
    for (f, _) in optima {
        let near = reps
            .iter()
            .any(|g| f.iter().zip(g.iter()).all(|(a, b)| (a - b).abs() <= 10.0 * tol));
        if !near {
            reps.push(f);
        }
    }
    reps.len()
}
