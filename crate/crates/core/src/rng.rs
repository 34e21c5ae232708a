//! Seeded, reproducible random streams.
//!
//! Every stream is a ChaCha20 keystream keyed by a 64-bit seed. Independent
//! trials use the same key with a different stream id, so trial `t` of a
//! benchmark draws the same numbers no matter which thread runs it.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct RandomStream {
    inner: ChaCha20Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Stream `id` of the keystream keyed by `seed`.
    pub fn with_stream(seed: u64, id: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(id);
        RandomStream { inner }
    }

    /// Stream reserved for Monte-Carlo trial `trial`. Stream 0 is left for
    /// single-shot runs so that `for_trial(s, 0)` differs from `new(s)`.
    pub fn for_trial(seed: u64, trial: u64) -> Self {
        Self::with_stream(seed, trial.wrapping_add(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw from the open interval (0, 1), built from the top 53 bits
    /// of one 64-bit word.
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * TWO_POW_NEG_53
    }

    /// Uniform draw from [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_POW_NEG_53
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "empty range");
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// Laplace draw with density `exp(-|x|/scale) / (2 scale)`, sampled by
    /// inverting the CDF at one open uniform.
    pub fn laplace(&mut self, scale: f64) -> f64 {
        let u = self.uniform_open() - 0.5;
        -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
    }
}
