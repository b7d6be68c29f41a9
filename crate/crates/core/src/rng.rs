//! Seeded random streams.
//!
//! Every consumer draws from a `ChaCha8Rng` keyed by a 64-bit seed and a
//! 64-bit stream id, so independent purposes never share a sequence.
//! Normals come from `rand_distr::StandardNormal` (ziggurat); reproducibility
//! holds for a fixed seed, stream and dependency version.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a simulator stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Init = 0,
    Train = 1,
    Test = 2,
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream for one (trial, purpose) pair of a simulation.
pub fn trial_rng(seed: u64, trial: u64, purpose: Purpose) -> ChaCha8Rng {
    stream_rng(seed, trial * 4 + purpose as u64)
}
