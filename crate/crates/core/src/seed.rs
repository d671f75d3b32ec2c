//! Deterministic seed derivation.
//!
//! Sub-seeds are `splitmix64(master ^ fnv1a64(part_0 0xff part_1 0xff ...))`,
//! which depends only on the inputs, never on iteration order or thread
//! scheduling. Random streams are ChaCha8 seeded through `seed_from_u64`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier recorded in manifests for the generator and derivation scheme.
pub const RNG_ALGORITHM: &str = "chacha8/seed_from_u64; sub-seeds splitmix64(master ^ fnv1a64(parts))";

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub fn derive_seed(master: u64, parts: &[&str]) -> u64 {
    let mut bytes = Vec::new();
    for part in parts {
        bytes.extend_from_slice(part.as_bytes());
        bytes.push(0xff);
    }
    splitmix64(master ^ fnv1a64(&bytes))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in `[0, 1)` from the top 53 bits of one `u64`.
pub fn unit_f64(rng: &mut impl rand::RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
