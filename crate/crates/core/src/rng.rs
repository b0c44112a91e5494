//! Seeded deterministic randomness.
//!
//! Every random quantity in a benchmark run comes from a [`RandomSource`]. The
//! generator is xoshiro256** seeded through SplitMix64, and every derived draw
//! (uniform reals, bounded integers, Gaussians, permutations) is defined here
//! bit for bit, so a `(seed, scenario)` pair reproduces the same trajectory in
//! any implementation that follows the same recipe:
//!
//! * `next_u64`: xoshiro256** output.
//! * unit uniform: `(next_u64 >> 11) * 2^-53`, in `[0, 1)`.
//! * bounded integer in `[0, n)`: Lemire's multiply-shift with rejection.
//! * Gaussian: Marsaglia's polar form of Box–Muller; pairs are drawn as
//!   `u = 2U - 1`, `v = 2U - 1`, rejected unless `0 < u² + v² < 1`, the first
//!   output is returned and the second cached for the next call.
//! * permutation: Fisher–Yates starting from the identity, for `i = n-1 … 1`
//!   swap `i` with a bounded draw in `[0, i]`.

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256StarStar};

use crate::error::{Error, Result};

/// Deterministic random stream. Not safe for concurrent draws; move it
/// between threads only between draws.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomSource {
    seed: u64,
    core: Xoshiro256StarStar,
    cached_gaussian: Option<f64>,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            core: Xoshiro256StarStar::seed_from_u64(seed),
            cached_gaussian: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.core.next_u64()
    }

    /// Uniform real in `[0, 1)` with 53 bits of precision.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform real in `[lo, hi)`; `lo == hi` returns `lo`.
    pub fn next_uniform(&mut self, lo: f64, hi: f64) -> Result<f64> {
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidRange { lo, hi });
        }
        let u = self.next_unit();
        if lo == hi {
            return Ok(lo);
        }
        let value = lo + (hi - lo) * u;
        // rounding can land exactly on `hi`
        Ok(if value >= hi { hi.next_down() } else { value })
    }

    /// Uniform integer in `[0, n)` (Lemire). `n` must be positive.
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "bounded draw needs a positive bound");
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Uniform integer in the inclusive range `[lo, hi]`.
    pub fn next_int_inclusive(&mut self, lo: u64, hi: u64) -> Result<u64> {
        if lo > hi {
            return Err(Error::InvalidRange {
                lo: lo as f64,
                hi: hi as f64,
            });
        }
        Ok(lo + self.next_below(hi - lo + 1))
    }

    /// Standard normal draw (polar Box–Muller, second value cached).
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(cached) = self.cached_gaussian.take() {
            return cached;
        }
        loop {
            let u = 2.0 * self.next_unit() - 1.0;
            let v = 2.0 * self.next_unit() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                self.cached_gaussian = Some(v * factor);
                return u * factor;
            }
        }
    }

    /// Uniform permutation of `0..n` by Fisher–Yates (`n - 1` bounded draws).
    pub fn next_permutation(&mut self, n: usize) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            perm.swap(i, j);
        }
        perm
    }

    /// A statistically independent stream keyed off this source's seed.
    pub fn derive(&self, stream: u64) -> RandomSource {
        let mut sm = SplitMix64::seed_from_u64(self.seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        RandomSource::new(sm.next_u64())
    }
}

/// Convenience constructor mirroring [`RandomSource::new`].
pub fn create_rng(seed: u64) -> RandomSource {
    RandomSource::new(seed)
}
