//! Numeric building blocks shared by the schemes: bit strings, exact
//! `2^{t/b}` arithmetic, two-parts rounding, the monotone sequence code,
//! the broadword rank dictionary and label part packing.

mod bits;
mod monotone;
mod pack;
mod rank;
mod roots;
mod two_parts;

use thiserror::Error;

pub use bits::{BitReader, Bits};
pub use monotone::{decode_monotone, encode_monotone};
pub use pack::{pack_parts, unpack_parts};
pub use rank::{RankAnswer, RankDict};
pub use roots::{floor_mul_pow2, min_exp, min_exp_u64, pow_ceil, pow_floor, round_pow, BoundExp, UpperFixed};
pub use two_parts::{round_up, two_parts_round, two_parts_trunc, TwoParts};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("value must be positive")]
    Zero,
    #[error("base must be positive")]
    BadBase,
    #[error("bit stream ended early")]
    Truncated,
    #[error("field of {0} bits is too wide")]
    TooWide(usize),
    #[error("sequence is not monotone")]
    NotMonotone,
    #[error("value {value} exceeds bound {bound}")]
    OutOfRange { value: u64, bound: u64 },
    #[error("invalid digit {0:?}")]
    BadDigit(char),
    #[error("{digits} hex digits cannot hold exactly {bits} bits")]
    HexLength { digits: usize, bits: usize },
    #[error("nonzero padding after the last bit")]
    HexPadding,
}
