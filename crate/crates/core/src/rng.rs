//! Seeded 64-bit generator shared by the samplers.
//!
//! Backed by Marsaglia's xorshift128 (`rand_xorshift`), seeded through
//! `seed_from_u64` (a PCG32 stream expands the seed into the state). Uniform
//! reals take the top 53 bits; bounded integers use a 64×64→128 multiply.

use rand_core::{RngCore, SeedableRng};
use rand_xorshift::XorShiftRng;

#[derive(Debug, Clone)]
pub struct Rng(XorShiftRng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self(XorShiftRng::seed_from_u64(seed))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `0..n`; `n` must be nonzero.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_streams() {
        let mut a = Rng::new(0);
        let mut b = Rng::new(0);
        let mut c = Rng::new(1);
        let xs: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let zs: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
    }

    #[test]
    fn ranges() {
        let mut r = Rng::new(42);
        let mut sum = 0.0;
        for _ in 0..100_000 {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
            sum += u;
            assert!(r.below(7) < 7);
        }
        assert!((sum / 100_000.0 - 0.5).abs() < 0.01);
    }
}
