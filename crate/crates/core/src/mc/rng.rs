//! Reproducible random streams.
//!
//! A [`RngSpec`] names one ChaCha8 stream. The 256-bit key is four successive
//! SplitMix64 outputs seeded with `master_seed`; the ChaCha stream id is the
//! SplitMix64 finalizer applied to `stream_index`. Both steps are pure integer
//! arithmetic, so a spec reproduces the same numbers on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer: a bijective 64-bit avalanche mix.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self { master_seed, stream_index }
    }

    /// Generator for this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut state = self.master_seed;
        for chunk in key.chunks_exact_mut(8) {
            state = state.wrapping_add(GOLDEN_GAMMA);
            chunk.copy_from_slice(&mix64(state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(mix64(self.stream_index));
        rng
    }

    /// The `i`-th child stream. Children of distinct specs use distinct keys,
    /// so batches launched from neighbouring specs never share streams.
    pub fn child(&self, i: u64) -> RngSpec {
        RngSpec { master_seed: mix64(self.master_seed ^ mix64(self.stream_index.wrapping_add(GOLDEN_GAMMA))), stream_index: i }
    }
}
