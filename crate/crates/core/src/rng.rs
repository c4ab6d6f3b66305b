//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream derived from a
//! single `u64` seed, so runs are reproducible across platforms. Independent
//! consumers take separate stream ids instead of sharing one generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Well-known stream ids.
pub mod stream {
    pub const GENERATOR_INIT: u64 = 1;
    pub const TARGET_PARAMS: u64 = 2;
    pub const TRAINING_SET: u64 = 3;
    pub const WGAN_INIT: u64 = 4;
    pub const WGAN_TRAIN: u64 = 5;
    pub const WGAN_SAMPLES: u64 = 6;
}

pub fn seeded(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
