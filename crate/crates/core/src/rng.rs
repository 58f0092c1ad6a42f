//! Seed derivation. Every random stream in the crate is a ChaCha8 generator
//! seeded from a master seed and a path of tags, so results never depend on
//! evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a child stream identifier into a parent seed.
pub fn derive(seed: u64, tag: u64) -> u64 {
    splitmix(splitmix(seed) ^ tag.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Tag for a string label (FNV-1a), so call sites can name their streams.
pub const fn tag(label: &str) -> u64 {
    let bytes = label.as_bytes();
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut i = 0;
    while i < bytes.len() {
        h ^= bytes[i] as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
        i += 1;
    }
    h
}

pub fn stream(seed: u64, label: &str) -> Rng {
    Rng::seed_from_u64(derive(seed, tag(label)))
}

pub fn stream_indexed(seed: u64, label: &str, index: u64) -> Rng {
    Rng::seed_from_u64(derive(derive(seed, tag(label)), index))
}
