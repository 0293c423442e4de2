//! Seeded pseudo-random numbers for reproducible snapshot initial conditions.
//!
//! Xoshiro256++ seeded through SplitMix64 (`Xoshiro256PlusPlus::seed_from_u64`).
//! A uniform double in `[0, 1)` is `(next_u64 >> 11) * 2^-53`; a value in
//! `[-1, 1)` is `2u - 1`.

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

#[derive(Debug, Clone)]
pub struct SeededRng(Xoshiro256PlusPlus);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn symmetric(&mut self) -> f64 {
        2.0 * self.uniform() - 1.0
    }
}
