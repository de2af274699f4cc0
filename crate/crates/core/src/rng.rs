//! Counter-keyed standard normal variates.
//!
//! Variate `k` of stream `seed` is a pure function of `(seed, k)`: it is built
//! by Box-Muller from the two 64-bit words at ChaCha12 word position `4 k`.
//! Sequential reads and random access therefore agree, and ensemble members
//! never depend on execution order.

use core::f64::consts::TAU;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

const WORDS_PER_VARIATE: u128 = 4;

#[derive(Clone, Debug)]
pub struct GaussianStream {
    rng: ChaCha12Rng,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    /// Variate `index` of stream `seed`.
    pub fn at(seed: u64, index: u64) -> f64 {
        let mut s = Self::new(seed);
        s.seek(index);
        s.next_normal()
    }

    /// Positions the stream so the next call returns variate `index`.
    pub fn seek(&mut self, index: u64) {
        self.rng.set_word_pos(WORDS_PER_VARIATE * index as u128);
    }

    pub fn next_normal(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = ((self.rng.next_u64() >> 11) + 1) as f64 * SCALE;
        let u2 = (self.rng.next_u64() >> 11) as f64 * SCALE;
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(TAU * u2)
    }
}

/// Derives the seed of ensemble member `index` from a master seed.
///
/// This is SplitMix64 evaluated at `master + (index + 1) * 0x9E3779B97F4A7C15`;
/// it never consults time or OS entropy.
pub fn split_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
