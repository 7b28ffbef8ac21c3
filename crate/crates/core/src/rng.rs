//! Seeded, splittable random streams.
//!
//! Every random quantity in the crate is a function of a 64-bit seed and a
//! 64-bit stream id. Streams are ChaCha8 keystreams, so two streams never
//! overlap and a sub-computation can derive its own stream from an index
//! without touching shared state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedStream {
    pub seed: u64,
    pub stream: u64,
}

impl SeedStream {
    pub const fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Stream for the `index`-th piece of work below this one.
    pub fn child(&self, index: u64) -> Self {
        let mixed = splitmix64(self.stream ^ splitmix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)));
        Self {
            seed: self.seed,
            stream: mixed,
        }
    }
}

/// The splitmix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
