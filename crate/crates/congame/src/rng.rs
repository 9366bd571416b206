//! Counter-based random numbers for reproducible experiments.
//!
//! Draws are keyed by `(seed, stream, index, coord)` through a splitmix64
//! finalizer, so a perturbation draw depends only on its coordinates and not
//! on execution order or worker count. The same mixer backs a small
//! sequential generator used for sampling in tests.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Keyed draw, uniform on `[0, 1)`.
pub fn unit(seed: u64, stream: u64, index: u64, coord: u64) -> f64 {
    let mut h = mix(seed.wrapping_add(GOLDEN));
    h = mix(h ^ stream.wrapping_mul(GOLDEN).wrapping_add(1));
    h = mix(h ^ index.wrapping_mul(GOLDEN).wrapping_add(2));
    h = mix(h ^ coord.wrapping_mul(GOLDEN).wrapping_add(3));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Keyed draw, uniform on `[-radius, radius]`.
pub fn symmetric(seed: u64, stream: u64, index: u64, coord: u64, radius: f64) -> f64 {
    radius * (2.0 * unit(seed, stream, index, coord) - 1.0)
}

/// Sequential splitmix64 generator for test sampling.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix(self.state)
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    /// Uniform on `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform on `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }
}
