//! Seeding scheme.
//!
//! Every random quantity is drawn from a ChaCha8 generator. A run seed is
//! expanded into independent streams with [`ChaCha8Rng::set_stream`]: the
//! stream number encodes the workload stream id and the quantity being drawn
//! (inter-arrival gap, execution requirement, deadline offset), so adding a
//! stream to a workload leaves the samples of the others untouched.
//! Replication seeds are derived from a base seed with SplitMix64.

use rand::distributions::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Which per-job quantity a substream feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Arrival = 0,
    Execution = 1,
    Deadline = 2,
}

/// Stream number reserved for the CTMC engine's event clock.
const CTMC_STREAM: u64 = u64::MAX;

pub fn substream(seed: u64, stream_id: usize, quantity: Quantity) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id as u64 * 4 + quantity as u64);
    rng
}

pub fn ctmc_stream(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(CTMC_STREAM);
    rng
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of replication `index` under `base`.
pub fn replication_seed(base: u64, index: usize) -> u64 {
    splitmix64(splitmix64(base) ^ (index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Exponential variate with the given rate, by inverse CDF on an open-interval uniform.
pub fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    let u: f64 = Open01.sample(rng);
    -u.ln() / rate
}

/// Uniform variate on `[0, 1)`.
pub fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.gen::<f64>()
}
