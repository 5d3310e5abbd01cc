//! Seeded, counter-based random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream addressed by
//! `(seed, stream)`. Work split into numbered chunks therefore yields the same
//! result however the chunks are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed of trial `index` in a repeated experiment.
pub fn trial_seed(seed: u64, index: u64) -> u64 {
    seed ^ index
}
