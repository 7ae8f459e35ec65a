//! Seeded mixing and polynomial hash families.
//!
//! Everything random in the crate is derived from a `u64` seed through
//! [`mix64`], so runs are reproducible bit for bit.

/// Mersenne prime 2^61 - 1, the modulus of [`PolyHash`].
pub const MERSENNE_61: u64 = (1 << 61) - 1;

/// Number of usable output bits of a [`PolyHash`] value.
pub const POLY_BITS: usize = 61;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Keyed pseudorandom function of `(seed, input)`.
///
/// Counter-mode over [`mix64`]: the seed is whitened first so that nearby
/// seeds produce unrelated streams.
#[inline]
pub fn mix(seed: u64, input: u64) -> u64 {
    let key = mix64(seed.wrapping_add(GOLDEN_GAMMA));
    mix64(key ^ input.wrapping_mul(GOLDEN_GAMMA).wrapping_add(GOLDEN_GAMMA))
}

/// Maps a 64-bit hash to a uniform float in `[0, 1)`.
#[inline]
pub fn unit_interval(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Small deterministic generator used to draw hash coefficients.
#[derive(Debug, Clone)]
pub(crate) struct SplitMix64(u64);

impl SplitMix64 {
    pub(crate) fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub(crate) fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(GOLDEN_GAMMA);
        mix64(self.0)
    }

    /// Uniform in `[0, MERSENNE_61)` by rejection.
    pub(crate) fn next_field(&mut self) -> u64 {
        loop {
            let x = self.next_u64() >> 3;
            if x < MERSENNE_61 {
                return x;
            }
        }
    }
}

#[inline]
fn mul_mod(a: u64, b: u64) -> u64 {
    let prod = a as u128 * b as u128;
    let lo = (prod as u64) & MERSENNE_61;
    let hi = (prod >> 61) as u64;
    reduce(lo + hi)
}

#[inline]
fn reduce(x: u64) -> u64 {
    let y = (x & MERSENNE_61) + (x >> 61);
    if y >= MERSENNE_61 {
        y - MERSENNE_61
    } else {
        y
    }
}

/// Degree-3 polynomial over GF(2^61 - 1): a 4-wise independent family.
///
/// Each of the 61 bits of the output is an (almost exactly) unbiased
/// 4-wise independent sign function of the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolyHash {
    coeffs: [u64; 4],
}

impl PolyHash {
    pub(crate) fn draw(rng: &mut SplitMix64) -> Self {
        let coeffs = [
            rng.next_field(),
            rng.next_field(),
            rng.next_field(),
            rng.next_field(),
        ];
        Self { coeffs }
    }

    /// Canonical representative of `c0 + c1 x + c2 x^2 + c3 x^3 mod p`.
    #[inline]
    pub fn eval(&self, x: u64) -> u64 {
        let x = reduce(x);
        let [c0, c1, c2, c3] = self.coeffs;
        let mut acc = c3;
        acc = reduce(mul_mod(acc, x) + c2);
        acc = reduce(mul_mod(acc, x) + c1);
        reduce(mul_mod(acc, x) + c0)
    }

    /// `+1` or `-1` according to bit `bit` of [`eval`](Self::eval).
    #[inline]
    pub fn sign(&self, x: u64, bit: usize) -> i64 {
        debug_assert!(bit < POLY_BITS);
        if (self.eval(x) >> bit) & 1 == 1 {
            -1
        } else {
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mul_mod_matches_wide_arithmetic() {
        let mut rng = SplitMix64::new(11);
        for _ in 0..10_000 {
            let a = rng.next_field();
            let b = rng.next_field();
            let want = ((a as u128 * b as u128) % MERSENNE_61 as u128) as u64;
            assert_eq!(mul_mod(a, b), want);
        }
    }

    #[test]
    fn eval_matches_horner_in_u128() {
        let mut rng = SplitMix64::new(5);
        let h = PolyHash::draw(&mut rng);
        let p = MERSENNE_61 as u128;
        for x in [0u64, 1, 2, 17, 1 << 40, MERSENNE_61 - 1] {
            let xx = x as u128 % p;
            let mut want = 0u128;
            for &c in h.coeffs.iter().rev() {
                want = (want * xx + c as u128) % p;
            }
            assert_eq!(h.eval(x) as u128, want);
        }
    }

    #[test]
    fn low_bit_is_balanced() {
        let mut rng = SplitMix64::new(99);
        let mut ones = 0;
        let trials = 20_000;
        for i in 0..trials {
            let h = PolyHash::draw(&mut rng);
            if h.sign(i % 50 + 1, 0) < 0 {
                ones += 1;
            }
        }
        let frac = ones as f64 / trials as f64;
        assert!((frac - 0.5).abs() < 0.02, "{frac}");
    }

    #[test]
    fn unit_interval_bounds() {
        assert_eq!(unit_interval(0), 0.0);
        assert!(unit_interval(u64::MAX) < 1.0);
    }
}
