//! Helpers shared by the encoders: heavy-path traversal order and turning
//! per-path relative positions into absolute start values.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::codec::{BitReader, Bits};
use crate::error::{malformed, SchemeError};
use crate::tree::{HeavyDecomposition, PortAssignment, Tree};

/// Heavy-path heads, children's paths before their parents'.
pub(crate) fn heads_bottom_up(h: &HeavyDecomposition, n: usize) -> Vec<usize> {
    (0..n).rev().filter(|&u| h.is_head(u)).collect()
}

/// Light children of `u` in port order (ports 2, 3, …).
pub(crate) fn light_children(p: &PortAssignment, u: usize) -> &[usize] {
    let c = p.ordered_children(u);
    if c.is_empty() {
        c
    } else {
        &c[1..]
    }
}

/// Absolute starts from positions relative to the frame of each heavy path.
///
/// A path node's position is relative to its own head; a light head's
/// position is relative to the head of its parent's path.
pub(crate) fn absolute_starts(t: &Tree, h: &HeavyDecomposition, pos: &[BigUint]) -> Vec<BigUint> {
    let n = t.len();
    let mut start = vec![BigUint::zero(); n];
    for v in 1..n {
        let base = if h.is_head(v) {
            &start[h.head(t.parent(v).expect("non-root"))]
        } else {
            &start[h.head(v)]
        };
        start[v] = base + &pos[v];
    }
    start
}

pub(crate) fn big_part(v: &BigUint) -> Bits {
    Bits::from_big(v, v.bits().max(1))
}

pub(crate) fn u64_part(v: u64) -> Bits {
    Bits::minimal(v)
}

pub(crate) fn read_u64_part(b: &Bits) -> Result<u64, SchemeError> {
    b.to_u64().map_err(|_| malformed("integer part wider than 64 bits"))
}

pub(crate) fn expect_parts(parts: &[Bits], n: usize, scheme: &str) -> Result<(), SchemeError> {
    if parts.len() != n {
        return Err(malformed(format!("{scheme} label needs {n} parts, found {}", parts.len())));
    }
    Ok(())
}

/// Reads fixed-width fields until the part is exhausted.
pub(crate) fn read_fields(b: &Bits, width: u32) -> Result<Vec<u64>, SchemeError> {
    if width == 0 || b.len() % width as usize != 0 {
        return Err(malformed("field part length is not a multiple of the field width"));
    }
    let mut r: BitReader<'_> = b.reader();
    let mut out = Vec::with_capacity(b.len() / width as usize);
    while !r.is_done() {
        out.push(r.read_u64(width)?);
    }
    Ok(out)
}

/// `⌈log₂ x⌉`, with 0 for `x ≤ 1`.
pub(crate) fn ceil_log2_big(x: &BigUint) -> u64 {
    if x.bits() <= 1 {
        0
    } else {
        (x - 1u32).bits()
    }
}
