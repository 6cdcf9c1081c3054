//! Deterministic random streams.
//!
//! Every random quantity comes from a ChaCha8 generator seeded with the master
//! seed and positioned on a stream identified by a purpose tag and an index
//! (replication or replicate number). Streams never overlap, so results do not
//! depend on the order in which work items run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tag for simulated paths.
pub const TAG_SIMULATE: u64 = 1;
/// Stream tag for bootstrap weights.
pub const TAG_BOOTSTRAP: u64 = 2;
/// Stream tag for Monte Carlo replications that need a second source.
pub const TAG_AUX: u64 = 3;

/// Generator for `(seed, tag, index)`. `index` must fit in 48 bits.
pub fn stream(seed: u64, tag: u64, index: u64) -> Rng {
    debug_assert!(index < 1 << 48);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((tag << 48) | index);
    rng
}

/// Derives a child seed, used when a whole sub-experiment needs its own master seed.
pub fn derive_seed(seed: u64, tag: u64, index: u64) -> u64 {
    use rand::RngCore;
    stream(seed, tag, index).next_u64()
}
