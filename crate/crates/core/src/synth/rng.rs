//! Portable random source for every simulation in the crate.
//!
//! The bit stream is ChaCha20 (RFC 8439 block function, as implemented by
//! `rand_chacha::ChaCha20Rng`), keyed by expanding a 64-bit seed with
//! `SeedableRng::seed_from_u64` (PCG32 expansion). Independent sub-streams
//! use the ChaCha stream id. Derived variates use only fixed, documented
//! transforms so any language with a ChaCha20 implementation can reproduce
//! them:
//!
//! - uniform on `[0, 1)`: top 53 bits of one `u64`, times `2⁻⁵³`;
//! - standard normal: Box-Muller on two uniforms, `sqrt(−2 ln(1 − u₁)) ·
//!   cos(2π u₂)`, then the paired `sin` value on the next call;
//! - exponential with rate `λ`: `−ln(1 − u) / λ`.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone)]
pub struct SynthRng {
    inner: ChaCha20Rng,
    spare: Option<f64>,
}

impl SynthRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Generator for sub-stream `stream` of `seed`.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner, spare: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn range(&mut self, lo: u64, hi: u64) -> u64 {
        lo + (self.uniform() * (hi - lo + 1) as f64) as u64
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * (1.0 - u1).ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }

    pub fn exponential(&mut self, rate: f64) -> f64 {
        -(1.0 - self.uniform()).ln() / rate
    }
}
