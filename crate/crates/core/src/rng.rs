//! Counter-based randomness keyed by (master seed, round, vertex, color, purpose).
//!
//! Every random decision is a pure function of its key, so per-vertex work can
//! run in any order or on any thread and still reproduce bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a draw is used for; part of the key so streams never collide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Activate = 1,
    Select = 2,
    TieBreak = 3,
    QEstimate = 4,
    Complete = 5,
    Generate = 6,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn absorb(state: u64, word: u64) -> u64 {
    mix(state.wrapping_add(GOLDEN) ^ mix(word.wrapping_add(GOLDEN)))
}

/// Hashes a key to 64 well-mixed bits.
#[inline]
pub fn key(seed: u64, purpose: Purpose, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(absorb(mix(seed), purpose as u64), |s, &w| absorb(s, w))
}

/// Uniform draw in `[0, 1)` for the given key, using the top 53 bits.
#[inline]
pub fn uniform(seed: u64, purpose: Purpose, words: &[u64]) -> f64 {
    (key(seed, purpose, words) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A full generator for keys that need many draws.
pub fn stream(seed: u64, purpose: Purpose, words: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(key(seed, purpose, words))
}
