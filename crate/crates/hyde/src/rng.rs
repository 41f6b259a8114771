//! Reproducible random streams for the noise simulators.
//!
//! Every simulator derives its own xoshiro256++ stream from `(seed, op id)`,
//! so identical calls produce bit-identical output on every platform and
//! concurrent calls cannot interleave draws. The Gaussian sampler is
//! Box-Muller over the raw 64-bit stream; this mapping is frozen — changing
//! it would silently change every seeded noise realization.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

/// Stream labels, one per randomized operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamId {
    GaussianSnr = 1,
    NoniidGaussian = 2,
    SaltPepper = 3,
    Deadline = 4,
    Stripe = 5,
    Augment = 6,
    Synth = 7,
    Bench = 8,
}

/// SplitMix64 output function, used to mix `(seed, stream)` into one 64-bit
/// state seed.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// A seeded, platform-independent random stream.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: Xoshiro256PlusPlus,
    spare_gaussian: Option<f64>,
}

impl Stream {
    pub fn new(seed: u64, id: StreamId) -> Self {
        let mixed = splitmix64(seed ^ (id as u64).wrapping_mul(0xA076_1D64_78BD_642F));
        Stream {
            rng: Xoshiro256PlusPlus::seed_from_u64(mixed),
            spare_gaussian: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.uniform() * (hi - lo)
    }

    /// Uniform integer in [0, n). `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        let i = (self.uniform() * n as f64) as usize;
        i.min(n - 1)
    }

    /// Standard normal via Box-Muller; the spare from each pair is cached.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare_gaussian.take() {
            return z;
        }
        // u1 in (0, 1] so the log is finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_gaussian = Some(r * theta.sin());
        r * theta.cos()
    }

    /// `k` distinct indices from [0, n), in selection order (partial
    /// Fisher-Yates).
    pub fn choose_distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        debug_assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        let mut picked = Vec::with_capacity(k);
        for i in 0..k {
            let j = i + self.index(n - i);
            pool.swap(i, j);
            picked.push(pool[i]);
        }
        picked
    }
}
