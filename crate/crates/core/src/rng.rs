//! Seedable pseudo-random generator used by every randomized component.
//!
//! The generator is `xorshift64*` (version 1 of this crate's RNG contract):
//!
//! ```text
//! seed:   state = splitmix64(seed); if state == 0 { state = 0x9E3779B97F4A7C15 }
//! next:   x ^= x >> 12; x ^= x << 25; x ^= x >> 27; return x * 0x2545F4914F6CDD1D
//! below(n):  ((next() as u128 * n as u128) >> 64) as u64
//! unit():    (next() >> 11) as f64 * 2^-53          // in [0, 1)
//! chance(p): unit() < p
//! ```
//!
//! `splitmix64(z)`: `z += 0x9E3779B97F4A7C15; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB; z ^ (z >> 31)` (wrapping arithmetic).
//!
//! Every consumer documents the order in which it draws values, so two
//! implementations of the same contract produce identical runs.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const MULTIPLIER: u64 = 0x2545_F491_4F6C_DD1D;

/// Identifier written into traces and reports.
pub const RNG_NAME: &str = "xorshift64star-v1";

fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XorShift64Star {
    state: u64,
}

impl XorShift64Star {
    pub fn seed_from_u64(seed: u64) -> Self {
        let state = match splitmix64(seed) {
            0 => GOLDEN,
            s => s,
        };
        XorShift64Star { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(MULTIPLIER)
    }

    /// Uniform integer in `0..bound` by multiply-shift. `bound` must be nonzero.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "below(0)");
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }

    pub fn index(&mut self, len: usize) -> usize {
        self.below(len as u64) as usize
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    /// Derives an independent generator, e.g. one per run of a batch.
    pub fn fork(&mut self) -> Self {
        XorShift64Star::seed_from_u64(self.next_u64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = XorShift64Star::seed_from_u64(42);
        let mut b = XorShift64Star::seed_from_u64(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn reference_values_are_pinned() {
        // Freezes the documented contract; a change here breaks trace
        // compatibility with recorded runs.
        let mut r = XorShift64Star::seed_from_u64(0);
        let first: [u64; 3] = [r.next_u64(), r.next_u64(), r.next_u64()];
        let mut check = XorShift64Star { state: splitmix64(0) };
        for want in first {
            let mut x = check.state;
            x ^= x >> 12;
            x ^= x << 25;
            x ^= x >> 27;
            check.state = x;
            assert_eq!(want, x.wrapping_mul(MULTIPLIER));
        }
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn below_stays_in_range() {
        let mut r = XorShift64Star::seed_from_u64(7);
        let mut seen = [false; 5];
        for _ in 0..500 {
            let v = r.below(5) as usize;
            assert!(v < 5);
            seen[v] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn unit_interval() {
        let mut r = XorShift64Star::seed_from_u64(9);
        for _ in 0..1000 {
            let u = r.unit();
            assert!((0.0..1.0).contains(&u));
        }
        assert!(!r.chance(0.0));
    }
}
