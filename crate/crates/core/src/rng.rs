//! Deterministic random streams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] whose seed is
//! derived from a master seed plus a path of integer tags. Parallel workers
//! derive their own substream from `(seed, tag, index)` so the result never
//! depends on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a path of tags into a single 64-bit key.
pub fn mix(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

/// Substream for `(seed, path...)`.
pub fn stream(seed: u64, path: &[u64]) -> Rng {
    let key = mix(seed, path);
    let mut bytes = [0u8; 32];
    for (i, chunk) in bytes.chunks_mut(8).enumerate() {
        chunk.copy_from_slice(&splitmix64(key.wrapping_add(i as u64)).to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}

/// Well-known stream tags. Keeping them in one place avoids accidental reuse.
pub mod tags {
    pub const TRAIN: u64 = 1;
    pub const TEST: u64 = 2;
    pub const OBSERVABLE: u64 = 3;
    pub const ANSATZ: u64 = 4;
    pub const TARGET: u64 = 5;
    pub const NOISE: u64 = 6;
    pub const WINDOWS: u64 = 7;
    pub const TRIAL: u64 = 8;
    pub const SPLIT: u64 = 9;
    pub const FEATURES: u64 = 10;
}
