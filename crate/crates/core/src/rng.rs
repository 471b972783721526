//! Seeded, splittable random streams.
//!
//! Every trial draws from its own ChaCha stream keyed by the master seed and
//! selected by the trial index, so results do not depend on how trials are
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default master seed for every seeded experiment.
pub const DEFAULT_SEED: u64 = 0xD0DD5;

/// The independent stream for trial `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
