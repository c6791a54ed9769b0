use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;

use super::CodecError;

/// Growable bit string, most significant bit first.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Bits {
    bits: Vec<bool>,
}

impl Bits {
    pub fn new() -> Bits {
        Bits::default()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn push(&mut self, b: bool) {
        self.bits.push(b);
    }

    pub fn extend(&mut self, other: &Bits) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] = !self.bits[i];
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    /// Appends the low `width` bits of `v`.
    pub fn push_u64(&mut self, v: u64, width: u32) {
        debug_assert!(width == 64 || v >> width == 0, "{v} does not fit in {width} bits");
        for i in (0..width).rev() {
            self.bits.push((v >> i) & 1 == 1);
        }
    }

    /// Appends `v` as exactly `width` bits.
    pub fn push_big(&mut self, v: &BigUint, width: u64) {
        debug_assert!(v.bits() <= width, "{v} does not fit in {width} bits");
        for i in (0..width).rev() {
            self.bits.push(v.bit(i));
        }
    }

    /// Minimal binary form of `v`, or a single `0` for zero.
    pub fn minimal(v: u64) -> Bits {
        let mut b = Bits::new();
        let w = (64 - v.leading_zeros()).max(1);
        b.push_u64(v, w);
        b
    }

    pub fn from_u64(v: u64, width: u32) -> Bits {
        let mut b = Bits::new();
        b.push_u64(v, width);
        b
    }

    pub fn from_big(v: &BigUint, width: u64) -> Bits {
        let mut b = Bits::new();
        b.push_big(v, width);
        b
    }

    pub fn to_u64(&self) -> Result<u64, CodecError> {
        if self.len() > 64 {
            return Err(CodecError::TooWide(self.len()));
        }
        Ok(self.iter().fold(0u64, |acc, b| (acc << 1) | u64::from(b)))
    }

    pub fn to_big(&self) -> BigUint {
        let mut v = BigUint::zero();
        for (i, b) in self.bits.iter().rev().enumerate() {
            if *b {
                v.set_bit(i as u64, true);
            }
        }
        v
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Result<Bits, CodecError> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(CodecError::BadDigit(c)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(|bits| Bits { bits })
    }

    /// Lowercase hex, first bit as the top bit of the first digit, right-padded with zeros.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.len().div_ceil(4));
        for chunk in self.bits.chunks(4) {
            let mut d = 0u32;
            for i in 0..4 {
                d = (d << 1) | u32::from(chunk.get(i).copied().unwrap_or(false));
            }
            s.push(char::from_digit(d, 16).expect("nibble"));
        }
        s
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<Bits, CodecError> {
        if hex.len() != len.div_ceil(4) {
            return Err(CodecError::HexLength { digits: hex.len(), bits: len });
        }
        let mut bits = Vec::with_capacity(hex.len() * 4);
        for c in hex.chars() {
            let d = c.to_digit(16).ok_or(CodecError::BadDigit(c))?;
            for i in (0..4).rev() {
                bits.push((d >> i) & 1 == 1);
            }
        }
        if bits[len..].iter().any(|&b| b) {
            return Err(CodecError::HexPadding);
        }
        bits.truncate(len);
        Ok(Bits { bits })
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { bits: self, pos: 0 }
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits(\"{self}\")")
    }
}

impl FromIterator<bool> for Bits {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Bits {
        Bits { bits: iter.into_iter().collect() }
    }
}

/// Sequential reader over a [`Bits`].
pub struct BitReader<'a> {
    bits: &'a Bits,
    pos: usize,
}

impl BitReader<'_> {
    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    pub fn is_done(&self) -> bool {
        self.remaining() == 0
    }

    pub fn read_bit(&mut self) -> Result<bool, CodecError> {
        if self.pos >= self.bits.len() {
            return Err(CodecError::Truncated);
        }
        self.pos += 1;
        Ok(self.bits.get(self.pos - 1))
    }

    pub fn read_u64(&mut self, width: u32) -> Result<u64, CodecError> {
        if width > 64 {
            return Err(CodecError::TooWide(width as usize));
        }
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | u64::from(self.read_bit()?);
        }
        Ok(v)
    }

    pub fn read_bits(&mut self, len: usize) -> Result<Bits, CodecError> {
        if self.remaining() < len {
            return Err(CodecError::Truncated);
        }
        let out = Bits { bits: self.bits.bits[self.pos..self.pos + len].to_vec() };
        self.pos += len;
        Ok(out)
    }
}
