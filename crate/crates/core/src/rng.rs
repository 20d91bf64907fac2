//! Seedable, splittable random streams.
//!
//! Every run owns a ChaCha8 stream derived from a master seed and a run
//! index, so parallel runs are reproducible regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RunRng = ChaCha8Rng;

/// Master stream for `seed`.
pub fn master(seed: u64) -> RunRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Child stream `index` of `seed`. Streams with different indices never overlap.
pub fn child(seed: u64, index: u64) -> RunRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
