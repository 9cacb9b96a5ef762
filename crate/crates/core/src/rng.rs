//! Seeded randomness used everywhere a result must be reproducible.
//!
//! The generator is SplitMix64 (64-bit state). Every consumer draws through
//! the helpers below so that the stream layout is fixed and can be replayed
//! by an independent implementation:
//!
//! * `uniform` takes the top 53 bits of one `next_u64` output and scales by 2^-53.
//! * `below(n)` is `floor(uniform * n)`, one draw.
//! * `shuffle` is a Fisher-Yates pass from the last index down to 1, one
//!   `below(i + 1)` draw per step.
//!
//! Sub-streams (per fold, per tree, per benchmark cell) get their own seed
//! from [`derive_seed`], so evaluation order never changes a result.

use rand::RngCore;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;

/// Name recorded in reports.
pub const PRNG_NAME: &str = "splitmix64";

pub struct Rng {
    inner: SplitMix64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: SplitMix64::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..n`. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        let i = (self.uniform() * n as f64) as usize;
        i.min(n - 1)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// Standard normal via Box-Muller (two draws, cosine branch only).
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform().max(f64::MIN_POSITIVE);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed, a textual tag and an integer.
///
/// FNV-1a over the tag bytes, then SplitMix64 finalisation of the combination.
pub fn derive_seed(seed: u64, tag: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    mix(mix(seed ^ h).wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}
