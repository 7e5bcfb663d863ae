//! The instance generator's random stream.
//!
//! ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with `seed_from_u64`, which
//! expands the 64-bit seed into the 256-bit key with PCG32 as specified by
//! `rand_core`. Every draw below is defined on top of `next_u64` so another
//! implementation of ChaCha8 reproduces instances bit for bit.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct Stream(ChaCha8Rng);

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// `(next_u64 >> 11) · 2⁻⁵³`, uniform on `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// `a + (b − a) · unit()`, on `[a, b)`.
    pub fn uniform(&mut self, a: f64, b: f64) -> f64 {
        a + (b - a) * self.unit()
    }

    /// Integer in `[a, b]`, both ends included: `a + ⌊unit() · (b − a + 1)⌋`.
    pub fn randint(&mut self, a: i64, b: i64) -> i64 {
        debug_assert!(a <= b);
        let span = (b - a + 1) as f64;
        a + ((self.unit() * span) as i64).min(b - a)
    }

    /// Uniform point of the probability simplex: `k` draws of
    /// `−ln(1 − unit())`, normalized.
    pub fn probability_vector(&mut self, k: usize) -> Vec<f64> {
        let e: Vec<f64> = (0..k).map(|_| -(1.0 - self.unit()).ln()).collect();
        let s: f64 = e.iter().sum();
        if s <= 0.0 {
            return vec![1.0 / k as f64; k];
        }
        e.into_iter().map(|v| v / s).collect()
    }
}
