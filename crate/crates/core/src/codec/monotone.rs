use super::{Bits, CodecError};

/// Encodes a nonincreasing sequence over `[0, z]`: a counter starts at `z`,
/// each `0` decrements it and each `1` emits its current value.
pub fn encode_monotone(seq: &[u64], z: u64) -> Result<Bits, CodecError> {
    let mut out = Bits::new();
    let mut c = z;
    for &a in seq {
        if a > z {
            return Err(CodecError::OutOfRange { value: a, bound: z });
        }
        if a > c {
            return Err(CodecError::NotMonotone);
        }
        for _ in a..c {
            out.push(false);
        }
        c = a;
        out.push(true);
    }
    Ok(out)
}

/// Decodes `count` elements.
pub fn decode_monotone(bits: &Bits, z: u64, count: usize) -> Result<Vec<u64>, CodecError> {
    let mut out = Vec::with_capacity(count);
    let mut c = z;
    let mut r = bits.reader();
    while out.len() < count {
        if r.read_bit()? {
            out.push(c);
        } else if c == 0 {
            return Err(CodecError::NotMonotone);
        } else {
            c -= 1;
        }
    }
    Ok(out)
}
