//! Seeded pseudo-random generator.
//!
//! Every stochastic step in the crate (k-means++ seeding, weight
//! initialization, train/test splits, minibatch shuffles, synthetic data)
//! draws from [`XorShift64Star`], so a fixed seed reproduces results bitwise.
//!
//! Algorithm, so other implementations can match it exactly:
//!
//! * seeding: `state = splitmix64(seed)`; a zero state is replaced by
//!   `0x9E37_79B9_7F4A_7C15`.
//! * step: `x ^= x >> 12; x ^= x << 25; x ^= x >> 27; state = x`,
//!   output `x * 0x2545_F491_4F6C_DD1D` (wrapping).
//! * unit float: `(next_u64() >> 11) * 2^-53`, in `[0, 1)`.
//! * bounded integer `below(n)`: rejection sampling on `next_u64() % n`
//!   with the zone `u64::MAX - (u64::MAX % n)`.
//! * shuffle: Fisher-Yates from the last index down, `j = below(i + 1)`.
//! * normal: Box-Muller with `u1 = 1 - unit()`, `u2 = unit()`, cosine branch.

use crate::Scalar;

const ZERO_STATE_REPLACEMENT: u64 = 0x9E37_79B9_7F4A_7C15;

/// One round of SplitMix64, used to spread user seeds over the state space.
pub fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed, e.g. one per k-means restart.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_add(1)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XorShift64Star {
    state: u64,
}

impl XorShift64Star {
    pub fn new(seed: u64) -> Self {
        let state = match splitmix64(seed) {
            0 => ZERO_STATE_REPLACEMENT,
            s => s,
        };
        Self { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`. Panics if `n == 0`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let x = self.next_u64();
            if x < zone {
                return (x % n) as usize;
            }
        }
    }

    /// Uniform in `[low, high)`.
    pub fn uniform<T: Scalar>(&mut self, low: T, high: T) -> T {
        low + (high - low) * T::lit(self.unit())
    }

    /// Standard normal deviate.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.unit();
        let u2 = self.unit();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn shuffle<E>(&mut self, items: &mut [E]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}
