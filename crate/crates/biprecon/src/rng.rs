//! Deterministic 64-bit linear congruential generator.
//!
//! The recurrence is `s ← a·s + c (mod 2^64)` with the constants from
//! [`crate::config`]; the top 53 bits of the state give a uniform double in
//! `[0, 1)`. The generator is deliberately simple so that random draws can be
//! reproduced bit for bit in any language.

use crate::config::{LCG_INCREMENT, LCG_MULTIPLIER};
use num_complex::Complex64;

/// 64-bit linear congruential generator.
#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    /// Seeds the generator. The seed is mixed by one step so that small seeds
    /// do not start with a nearly-zero state.
    pub fn new(seed: u64) -> Self {
        let mut g = Self { state: seed };
        g.next_u64();
        g
    }

    /// Advances the state and returns it.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(LCG_MULTIPLIER)
            .wrapping_add(LCG_INCREMENT);
        self.state
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[-1, 1)`.
    pub fn symmetric(&mut self) -> f64 {
        2.0 * self.uniform() - 1.0
    }

    /// Complex number with real and imaginary parts uniform in `[-1, 1)`.
    pub fn complex(&mut self) -> Complex64 {
        let re = self.symmetric();
        let im = self.symmetric();
        Complex64::new(re, im)
    }
}
