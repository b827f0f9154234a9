//! Seeded random stream shared by every simulator.
//!
//! A stream is a ChaCha8 generator plus the seed it was built from. The same
//! seed always yields the same sequence, so every simulation in this crate is
//! reproducible from `(seed, parameters)` alone.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{ensure, Result};

const INV_2_52: f64 = 1.0 / (1u64 << 52) as f64;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw on the open interval (0, 1).
    ///
    /// Uses the top 53 bits shifted by half a step, so the result is never
    /// exactly 0 or 1 and `-ln u` is always finite and positive.
    pub fn uniform(&mut self) -> f64 {
        ((self.inner.next_u64() >> 12) as f64 + 0.5) * INV_2_52
    }

    /// Uniform draw on `(lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// `-ln(u) / rate`; the caller guarantees `rate > 0`.
    pub(crate) fn exp_unchecked(&mut self, rate: f64) -> f64 {
        -self.uniform().ln() / rate
    }

    /// Poisson-distributed count with the given mean (`mean >= 0`).
    pub fn poisson(&mut self, mean: f64) -> Result<u64> {
        ensure(mean.is_finite() && mean >= 0.0, || {
            format!("poisson mean must be finite and >= 0, got {mean}")
        })?;
        if mean == 0.0 {
            return Ok(0);
        }
        let dist = Poisson::new(mean).map_err(|e| crate::Error::Parameter(e.to_string()))?;
        Ok(dist.sample(&mut self.inner) as u64)
    }

    /// Index drawn uniformly from `0..n` (`n > 0`).
    pub fn index(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// Derives `n` independent streams seeded `base + i`, where `base` is drawn
    /// from this stream. The derived streams depend only on this stream's state,
    /// never on how they are later scheduled.
    pub fn split(&mut self, n: usize) -> Vec<RngStream> {
        let base = self.inner.next_u64();
        (0..n as u64)
            .map(|i| RngStream::new(base.wrapping_add(i)))
            .collect()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// One exponential waiting time `-ln(u) / rate`.
pub fn exponential_draw(rng: &mut RngStream, rate: f64) -> Result<f64> {
    ensure(rate.is_finite() && rate > 0.0, || {
        format!("rate must be positive, got {rate}")
    })?;
    Ok(rng.exp_unchecked(rate))
}

/// The transform behind [`exponential_draw`] for a given uniform `u`.
pub fn exponential_from_uniform(u: f64, rate: f64) -> f64 {
    -u.ln() / rate
}
