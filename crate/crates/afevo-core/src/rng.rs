//! Seeded, portable random number stream.
//!
//! Every stochastic decision in the library (initialization, selection
//! coins, operator choices, weight init, shuffling) draws from a
//! [`RngStream`] so that a run is a pure function of its seeds. The
//! generator is SplitMix64: the state advances by the 64-bit golden-ratio
//! constant and the output is a finalizing mix of the new state. It has no
//! platform-dependent behaviour, so identical seeds yield identical draw
//! sequences everywhere.

/// SplitMix64 stream. State transition: `s += 0x9E3779B97F4A7C15`;
/// output: `mix64(s)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    state: u64,
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `[0, n)` via the multiply-shift reduction.
    ///
    /// The reduction bias is at most `n / 2^64`, which is negligible for
    /// the small `n` used here (operator and primitive tables, population
    /// indices).
    pub fn next_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (((self.next_u64() as u128) * (n as u128)) >> 64) as usize
    }

    /// Standard normal via Box–Muller (two uniform draws per sample).
    pub fn next_normal(&mut self) -> f64 {
        // u1 in (0, 1] so the log is finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Fisher–Yates shuffle driven by this stream.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_index(i + 1);
            items.swap(i, j);
        }
    }
}

/// Stable 64-bit hash for deriving per-genome seeds from a run seed.
///
/// FNV-1a over the key bytes, folded with the seed and passed through the
/// SplitMix64 finalizer. Not a general-purpose hash; it only has to be
/// deterministic across platforms and well-spread.
pub fn hash64(seed: u64, key: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325 ^ seed.wrapping_mul(0x9E3779B97F4A7C15);
    for b in key.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    mix64(h)
}
