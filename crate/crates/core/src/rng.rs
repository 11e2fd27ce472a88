//! Seeded random streams.
//!
//! Every stochastic component takes its generator explicitly. Independent
//! work units (a candidate relationship, an entity, a sweep point) get their
//! own stream derived from the run seed and a stable key, so results do not
//! depend on scheduling order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with a stream key.
pub fn derive_seed(base: u64, key: u64) -> u64 {
    splitmix64(base ^ splitmix64(key))
}

/// FNV-1a over a sequence of words; used to key streams by content.
pub fn key_of(words: impl IntoIterator<Item = u64>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for w in words {
        for b in w.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

pub fn key_of_str(s: &str) -> u64 {
    key_of(s.bytes().map(u64::from))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(base: u64, key: u64) -> Rng {
    rng_from_seed(derive_seed(base, key))
}
