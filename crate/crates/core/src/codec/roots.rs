//! Exact arithmetic on powers of `2^{1/b}`.
//!
//! Each base `b` gets a table of `⌊2^{r/b} · 2^P⌋` for `r < b`. Since those
//! roots are irrational for `0 < r < b`, comparing an integer against the
//! table is always decisive, and floors of `2^{t/b}` resolve from it unless
//! the scaled interval straddles an integer, in which case an exact integer
//! root is taken.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::CodecError;

const P: u64 = 512;

fn table(b: u32) -> Arc<Vec<BigUint>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<Vec<BigUint>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.read().expect("root table lock").get(&b) {
        return t.clone();
    }
    let t: Vec<BigUint> =
        (0..b).map(|r| (BigUint::one() << (r as u64 + P * b as u64)).nth_root(b)).collect();
    let t = Arc::new(t);
    cache.write().expect("root table lock").insert(b, t.clone());
    t
}

/// `⌊2^{t/b}⌋` computed exactly.
pub fn pow_floor(t: u64, b: u32) -> BigUint {
    assert!(b > 0, "base must be positive");
    let q = t / b as u64;
    let r = (t % b as u64) as usize;
    if r == 0 {
        return BigUint::one() << q;
    }
    if q <= P {
        let l = &table(b)[r];
        let lo = l >> (P - q);
        let hi: BigUint = (l + 1u32) >> (P - q);
        if lo == hi {
            return lo;
        }
    }
    (BigUint::one() << t).nth_root(b)
}

/// `⌈2^{t/b}⌉` computed exactly.
pub fn pow_ceil(t: u64, b: u32) -> BigUint {
    let f = pow_floor(t, b);
    if t % b as u64 == 0 {
        f
    } else {
        f + 1u32
    }
}

/// Smallest `t` with `⌊2^{t/b}⌋ ≥ x`, for `x ≥ 1`.
pub fn min_exp(x: &BigUint, b: u32) -> u64 {
    assert!(b > 0, "base must be positive");
    assert!(!x.is_zero(), "min_exp needs x ≥ 1");
    let k = x.bits() - 1;
    if x.trailing_zeros() == Some(k) {
        return k * b as u64;
    }
    if k >= P {
        return exact_min_exp(x, b);
    }
    let scaled = x << (P - k);
    let tab = table(b);
    let r = 1 + tab[1..].partition_point(|l| *l < scaled);
    k * b as u64 + r as u64
}

/// Smallest `t` with `2^t ≥ x^b`.
fn exact_min_exp(x: &BigUint, b: u32) -> u64 {
    let p = x.pow(b);
    (p - 1u32).bits()
}

pub fn min_exp_u64(x: u64, b: u32) -> u64 {
    min_exp(&BigUint::from(x), b)
}

/// `⌊x · 2^{num/den}⌋` computed exactly.
pub fn floor_mul_pow2(x: &BigUint, num: u64, den: u32) -> BigUint {
    assert!(den > 0);
    let q = num / den as u64;
    let r = num % den as u64;
    if r == 0 {
        return x << q;
    }
    ((x.pow(den)) << (num)).nth_root(den)
}

/// A bound of the form `⌊2^{t/b}⌋`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BoundExp {
    pub t: u64,
    pub b: u32,
}

impl BoundExp {
    pub fn value(&self) -> BigUint {
        pow_floor(self.t, self.b)
    }
}

/// Rounds `x` up to the nearest value `⌊2^{t/b}⌋`.
pub fn round_pow(x: &BigUint, b: u32) -> Result<BoundExp, CodecError> {
    if x.is_zero() {
        return Err(CodecError::Zero);
    }
    if b == 0 {
        return Err(CodecError::BadBase);
    }
    Ok(BoundExp { t: min_exp(x, b), b })
}

/// Upper approximations of real factors, as integers scaled by `2^FRAC`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpperFixed(BigUint);

impl UpperFixed {
    pub const FRAC: u64 = 128;

    pub fn one() -> UpperFixed {
        UpperFixed(BigUint::one() << Self::FRAC)
    }

    /// At least `2^{num/den}`, within one unit in the last place.
    pub fn pow2(num: u64, den: u64) -> UpperFixed {
        assert!(den > 0);
        let q = num / den;
        let r = num % den;
        let frac = if r == 0 {
            BigUint::one() << Self::FRAC
        } else {
            let root_den = u32::try_from(den).expect("root degree fits in u32");
            let x = BigUint::one() << (r + Self::FRAC * den);
            let f = x.nth_root(root_den);
            f + 1u32
        };
        UpperFixed(frac << q)
    }

    pub fn from_int(x: &BigUint) -> UpperFixed {
        UpperFixed(x << Self::FRAC)
    }

    /// Product, rounded up.
    pub fn mul(&self, other: &UpperFixed) -> UpperFixed {
        UpperFixed(ceil_shr(&self.0 * &other.0, Self::FRAC))
    }

    /// `⌈x · self⌉`.
    pub fn ceil_times(&self, x: &BigUint) -> BigUint {
        ceil_shr(x * &self.0, Self::FRAC)
    }

    /// `⌈self⌉`.
    pub fn ceil(&self) -> BigUint {
        ceil_shr(self.0.clone(), Self::FRAC)
    }
}

fn ceil_shr(v: BigUint, s: u64) -> BigUint {
    let mask = (BigUint::one() << s) - 1u32;
    let exact = (&v & &mask).is_zero();
    let q = v >> s;
    if exact {
        q
    } else {
        q + 1u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `⌊2^{t/b}⌋` by binary search on `y^b ≤ 2^t`.
    fn naive_floor(t: u64, b: u32) -> BigUint {
        let target = BigUint::one() << t;
        let mut lo = BigUint::one();
        let mut hi = BigUint::one() << (t / b as u64 + 1);
        while &lo + 1u32 < hi {
            let mid: BigUint = (&lo + &hi) >> 1;
            if mid.pow(b) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    #[test]
    fn floors_match_naive() {
        for b in [1u32, 2, 3, 5, 6, 7, 12, 20, 64] {
            for t in 0..(b as u64 * 40) {
                assert_eq!(pow_floor(t, b), naive_floor(t, b), "t={t} b={b}");
            }
        }
        for t in [3000u64, 4099, 5121] {
            assert_eq!(pow_floor(t, 6), naive_floor(t, 6));
        }
    }

    #[test]
    fn floor_mul_pow2_examples() {
        let x = BigUint::from(1_000_000u32);
        assert_eq!(floor_mul_pow2(&x, 1, 2), BigUint::from(1_414_213u32));
        assert_eq!(floor_mul_pow2(&x, 4, 2), BigUint::from(4_000_000u32));
        assert_eq!(floor_mul_pow2(&BigUint::from(3u32), 5, 3), BigUint::from(9u32));
    }

    #[test]
    fn round_pow_examples() {
        let r = round_pow(&BigUint::from(1u32), 9).unwrap();
        assert_eq!((r.t, r.value()), (0, BigUint::from(1u32)));
        let r = round_pow(&BigUint::from(5u32), 1).unwrap();
        assert_eq!((r.t, r.value()), (3, BigUint::from(8u32)));
        let r = round_pow(&BigUint::from(6u32), 2).unwrap();
        assert_eq!((r.t, r.value()), (6, BigUint::from(8u32)));
        assert_eq!(round_pow(&BigUint::zero(), 2), Err(CodecError::Zero));
    }

    #[test]
    fn min_exp_large_values_use_exact_path() {
        let x = (BigUint::one() << 600u32) + 12345u32;
        let t = min_exp(&x, 5);
        assert!(pow_floor(t, 5) >= x);
        assert!(pow_floor(t - 1, 5) < x);
        assert_eq!(t, exact_min_exp(&x, 5));
    }

    #[test]
    fn fixed_factors_bound_from_above() {
        let f = UpperFixed::pow2(1, 2);
        let x = BigUint::from(1_000_000u32);
        // √2 · 10⁶ = 1414213.56...
        assert_eq!(f.ceil_times(&x), BigUint::from(1_414_214u32));
        assert_eq!(UpperFixed::pow2(6, 3).ceil(), BigUint::from(4u32));
        let p = UpperFixed::pow2(1, 3).mul(&UpperFixed::pow2(2, 3));
        assert_eq!(p.ceil(), BigUint::from(3u32));
    }
}
