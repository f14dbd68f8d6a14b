//! Counter-based SplitMix64 generator.
//!
//! Draw `i` (0-based) of a stream with seed `s` is
//! `mix(s + (i + 1)·0x9E3779B97F4A7C15)` in wrapping 64-bit arithmetic, where
//! `mix` is the SplitMix64 finalizer. Uniforms take the top 53 bits,
//! `(x >> 11)·2⁻⁵³ ∈ [0, 1)`. Normals use Box–Muller on two consecutive
//! uniforms `u₁, u₂` as `√(−2 ln(1 − u₁))·cos(2πu₂)`. Sub-stream `k` of seed
//! `s` has seed `mix(s ^ mix(k + 0xD1B54A32D192ED03))`.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM: u64 = 0xD1B5_4A32_D192_ED03;

pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sub-stream `k` of `seed`.
pub fn substream_seed(seed: u64, k: u64) -> u64 {
    mix(seed ^ mix(k.wrapping_add(STREAM)))
}

#[derive(Debug, Clone)]
pub struct CounterRng {
    seed: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    /// Independent stream `k` derived from `seed`.
    pub fn substream(seed: u64, k: u64) -> Self {
        Self::new(substream_seed(seed, k))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self.seed.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}
