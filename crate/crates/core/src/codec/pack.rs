use super::{Bits, CodecError};

/// Self-delimiting concatenation: each part `s` is written as
/// `0^{|l|} ∘ 1 ∘ l ∘ s`, where `l` is `|s|` in minimal binary.
pub fn pack_parts(parts: &[Bits]) -> Bits {
    let mut out = Bits::new();
    for s in parts {
        let l = Bits::minimal(s.len() as u64);
        for _ in 0..l.len() {
            out.push(false);
        }
        out.push(true);
        out.extend(&l);
        out.extend(s);
    }
    out
}

pub fn unpack_parts(bits: &Bits) -> Result<Vec<Bits>, CodecError> {
    let mut r = bits.reader();
    let mut parts = Vec::new();
    while !r.is_done() {
        let mut z = 0u32;
        while !r.read_bit()? {
            z += 1;
            if z > 64 {
                return Err(CodecError::TooWide(z as usize));
            }
        }
        let len = r.read_u64(z)? as usize;
        parts.push(r.read_bits(len)?);
    }
    Ok(parts)
}
