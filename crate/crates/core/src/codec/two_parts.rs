use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

/// Mantissa/exponent form `m · 2^e` with `m` of fixed width `mbits`.
///
/// Values are normalized: `e > 0` only when the mantissa's top bit is set,
/// so comparing `e ∘ m` as a fixed-width key orders values numerically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TwoParts {
    pub m: u64,
    pub e: u64,
    pub mbits: u32,
}

impl TwoParts {
    pub fn value(&self) -> BigUint {
        BigUint::from(self.m) << self.e
    }

    /// `e ∘ m` as one integer; `e` must fit in `ebits`.
    pub fn key(&self, ebits: u32) -> u64 {
        assert!(ebits + self.mbits <= 64, "key wider than a word");
        assert!(ebits == 64 || self.e >> ebits == 0, "exponent {} exceeds {ebits} bits", self.e);
        (self.e << self.mbits) | self.m
    }
}

fn split(x: &BigUint, mbits: u32) -> (u64, u64, bool) {
    assert!((2..=63).contains(&mbits), "mantissa width {mbits} out of range");
    let e = x.bits().saturating_sub(mbits as u64);
    let m = (x >> e).to_u64().expect("mantissa fits");
    let dropped = e > 0 && x.trailing_zeros().is_some_and(|tz| tz < e);
    (m, e, dropped)
}

/// Keeps the `mbits` leading bits of `x`, rounding up when anything was dropped.
pub fn two_parts_round(x: &BigUint, mbits: u32) -> TwoParts {
    if x.is_zero() {
        return TwoParts { m: 0, e: 0, mbits };
    }
    let (mut m, mut e, dropped) = split(x, mbits);
    if dropped {
        m += 1;
        if m == 1 << mbits {
            m >>= 1;
            e += 1;
        }
    }
    TwoParts { m, e, mbits }
}

/// Keeps the `mbits` leading bits of `x`, discarding the rest.
pub fn two_parts_trunc(x: &BigUint, mbits: u32) -> TwoParts {
    let (m, e, _) = split(x, mbits);
    TwoParts { m, e, mbits }
}

pub fn round_up(x: &BigUint, mbits: u32) -> BigUint {
    two_parts_round(x, mbits).value()
}
