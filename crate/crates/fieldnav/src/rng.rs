//! Deterministic, labelled random-number streams.
//!
//! Every stochastic component (roadmap sampling, crowd spawning, detection
//! noise, tree search) draws from its own ChaCha stream derived from the
//! scenario's master seed, a component label, and an index. Streams are
//! therefore independent of each other and of call ordering elsewhere,
//! which is what makes whole runs byte-reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a on the label bytes; stable across platforms and releases.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x1_0000_01b3);
    }
    hash
}

/// Creates the RNG stream `(master_seed, label, index)`.
pub fn stream(master_seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let label_hash = fnv1a(label.as_bytes());
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&label_hash.to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    key[24..32].copy_from_slice(&(master_seed ^ label_hash.rotate_left(17)).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
