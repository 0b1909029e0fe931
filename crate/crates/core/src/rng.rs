//! Seeding conventions.
//!
//! Every stochastic routine takes `&mut R where R: Rng`. Experiments derive
//! one seed per replication from a master seed so that any replication can
//! be rerun in isolation.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Successive 64-bit draws of a generator seeded with `master`.
pub fn replication_seeds(master: u64, count: usize) -> Vec<u64> {
    let mut rng = seeded(master);
    (0..count).map(|_| rng.next_u64()).collect()
}

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = seeded(seed);
    rng.set_stream(stream);
    rng
}
