//! The portable generator behind every seeded corpus instance.
//!
//! SplitMix64: the state advances by the golden-ratio increment
//! `0x9E3779B97F4A7C15` and each output is finalized with
//!
//! ```text
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! z =  z ^ (z >> 31)
//! ```
//!
//! (all arithmetic wrapping mod 2^64). Uniform doubles take the top 53 bits:
//! `(z >> 11) * 2^-53`, which lies in `[0, 1)`. Any implementation following
//! these constants reproduces the same corpora bit for bit.

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
    pub const MIX1: u64 = 0xBF58_476D_1CE4_E5B9;
    pub const MIX2: u64 = 0x94D0_49BB_1331_11EB;

    pub const fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(Self::GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(Self::MIX1);
        z = (z ^ (z >> 27)).wrapping_mul(Self::MIX2);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[-r, r)`.
    pub fn symmetric(&mut self, r: f64) -> f64 {
        (2.0 * self.next_f64() - 1.0) * r
    }

    /// Uniform integer in `lo..=hi`. Modulo bias is irrelevant at corpus sizes.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        debug_assert!(lo <= hi);
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }
}
