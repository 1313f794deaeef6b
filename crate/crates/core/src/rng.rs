//! Counter-based random streams.
//!
//! Each replicate owns a ChaCha key derived from `(master_seed, replicate)`;
//! each cell, tile or auxiliary object inside a replicate reads from its own
//! stream number. Draws therefore never depend on evaluation order or on how
//! work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a label.
pub fn derive_seed(parent: u64, label: u64) -> u64 {
    splitmix64(splitmix64(parent) ^ label.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Key material for one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    key: [u8; 32],
}

impl StreamKey {
    pub fn new(master_seed: u64, replicate: u64) -> Self {
        let mut key = [0u8; 32];
        let mut s = master_seed ^ 0x5DEE_CE66_D1CE_4E5B;
        for (w, chunk) in key.chunks_mut(8).enumerate() {
            s = splitmix64(s ^ replicate.rotate_left(17 * w as u32 + 1));
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        StreamKey { key }
    }

    /// Generator for stream number `stream` under this key.
    pub fn stream(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(stream);
        rng
    }
}

/// Uniform in the open interval (0, 1) from 52 random bits.
#[inline]
pub fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}
