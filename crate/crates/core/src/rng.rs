//! Counter-addressed random draws.
//!
//! Every draw is a pure function of `(seed, stream, index)`, so results do not
//! depend on the order in which workers consume randomness.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream used for element-to-machine assignment.
pub const STREAM_PARTITION: u64 = 1;
/// Stream used for coin flips inside randomized algorithms.
pub const STREAM_ALGORITHM: u64 = 2;
/// Stream used to derive per-trial seeds from a master seed.
pub const STREAM_TRIALS: u64 = 3;

#[derive(Clone, Debug)]
pub struct CounterRng {
    inner: ChaCha8Rng,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    /// The `index`-th 64-bit word of this stream.
    pub fn word(&mut self, index: u64) -> u64 {
        self.inner.set_word_pos(u128::from(index) * 2);
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn unit(&mut self, index: u64) -> f64 {
        (self.word(index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `0..bound` by multiply-shift; `bound` must be positive.
    pub fn below(&mut self, index: u64, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        ((u128::from(self.word(index)) * u128::from(bound)) >> 64) as u64
    }
}

/// Derives an independent seed for trial `index` of a master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    CounterRng::new(master, STREAM_TRIALS).word(index)
}
