//! Seeded random streams used to generate problem instances.
//!
//! Instances must be reproducible from other languages, so every draw is
//! specified down to the bit:
//!
//! * generator: xoshiro256++, state initialised from the 64-bit seed by
//!   four successive SplitMix64 outputs;
//! * uniform: `(next_u64 >> 11) * 2^-53`, a value in `[0, 1)`;
//! * normal: Box–Muller on two consecutive uniforms `u1, u2`, with
//!   `rho = sqrt(-2 ln(1 - u1))`, returning `rho cos(2 pi u2)` first and
//!   caching `rho sin(2 pi u2)` for the next draw.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

/// Identifier written into run metadata next to every seed.
pub const GENERATOR_ID: &str =
    "xoshiro256++/splitmix64-seed/v1; uniform=(u64>>11)*2^-53; normal=box-muller(1-u1,cos-then-sin)";

#[derive(Clone, Debug)]
pub struct SeededRng {
    inner: Xoshiro256PlusPlus,
    spare_normal: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        // 1 - u1 lies in (0, 1], so the log is finite.
        let rho = (-2.0 * (1.0 - u1).ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(rho * theta.sin());
        rho * theta.cos()
    }

    pub fn normals(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }

    pub fn uniforms(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.uniform()).collect()
    }

    /// A point of the simplex: uniform entries rescaled to unit sum.
    pub fn simplex_point(&mut self, d: usize) -> Vec<f64> {
        let mut v = self.uniforms(d);
        let s: f64 = v.iter().sum();
        if s <= 0.0 {
            return vec![1.0 / d as f64; d];
        }
        v.iter_mut().for_each(|x| *x /= s);
        v
    }

    /// A strictly interior point of the simplex, entries bounded below by `floor / d`.
    pub fn interior_simplex_point(&mut self, d: usize, floor: f64) -> Vec<f64> {
        let mut v: Vec<f64> = (0..d).map(|_| floor + self.uniform()).collect();
        let s: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= s);
        v
    }
}
