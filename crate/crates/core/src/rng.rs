//! Per-sample random streams.
//!
//! Sample `i` of a run seeded with `seed` draws from ChaCha8 keyed by `seed`
//! on stream `i`. Streams are independent of each other and of scheduling,
//! so serial and parallel runs see the same bits.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Master seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

pub type SampleRng = ChaCha8Rng;

pub fn substream(master_seed: u64, index: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}
