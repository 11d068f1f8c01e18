/// SplitMix64 generator.
///
/// The update is `state += 0x9E3779B97F4A7C15` followed by the output mix
/// `z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
/// z *= 0x94D049BB133111EB; z ^= z >> 31`. Everything downstream that draws
/// pseudo-random values (oracle targets, sampled seed points) goes through
/// this generator so runs are reproducible bit-exactly from the config seed.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 bits of mantissa.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn next_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Stable mix of two indices into a stream seed, so certificates for
/// different (from, to) pairs draw independent targets no matter in which
/// order they are produced.
pub fn mix_seed(seed: u64, a: i64, b: i64) -> u64 {
    let mut s = SplitMix64::new(seed ^ (a as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let x = s.next_u64();
    let mut s2 = SplitMix64::new(x ^ (b as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F));
    s2.next_u64()
}
