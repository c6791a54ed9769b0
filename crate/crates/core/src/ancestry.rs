//! Interval ancestry labels built by shifting subtrees along heavy paths.
//!
//! Every node gets an interval `[start, start + bound)` with `bound` of the
//! form `⌊2^{t/b}⌋`; `u` is a proper ancestor of `w` exactly when
//! `start(w)` lies in `(start(u), start(u) + bound(u))`.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::audit::{Anchor, Audit};
use crate::codec::{floor_mul_pow2, min_exp, pack_parts, pow_floor, unpack_parts, Bits};
use crate::error::SchemeError;
use crate::layout::{
    absolute_starts, big_part, expect_parts, heads_bottom_up, light_children, read_u64_part,
    u64_part,
};
use crate::tree::{canonical_ports, ceil_log2, decompose, HeavyDecomposition, PortAssignment, Tree};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AncestryLabel {
    pub start: BigUint,
    /// Bound exponent: `bound = ⌊2^{t/b}⌋`.
    pub t: u64,
}

impl AncestryLabel {
    pub fn bound(&self, b: u32) -> BigUint {
        pow_floor(self.t, b)
    }

    pub fn to_bits(&self) -> Bits {
        pack_parts(&[big_part(&self.start), u64_part(self.t)])
    }

    pub fn from_bits(bits: &Bits) -> Result<AncestryLabel, SchemeError> {
        let parts = unpack_parts(bits)?;
        expect_parts(&parts, 2, "ancestry")?;
        Ok(AncestryLabel { start: parts[0].to_big(), t: read_u64_part(&parts[1])? })
    }
}

/// Output of the shifting procedure.
#[derive(Clone, Debug)]
pub(crate) struct Shifted {
    pub start: Vec<BigUint>,
    pub t: Vec<u64>,
    /// Extent of each heavy-path head's subtree (zero at non-heads).
    pub span: Vec<BigUint>,
}

/// Runs the shifting procedure on every heavy path, bottom-up. Light
/// children are laid out in port order. With `round_heads`, each head's
/// bound is raised so its extent is itself a `⌊2^{t/b}⌋` value.
pub(crate) fn shift(
    t: &Tree,
    h: &HeavyDecomposition,
    ports: &PortAssignment,
    b: u32,
    round_heads: bool,
) -> Shifted {
    let n = t.len();
    let mut pos = vec![BigUint::zero(); n];
    let mut texp = vec![0u64; n];
    let mut span = vec![BigUint::zero(); n];
    for head in heads_bottom_up(h, n) {
        let path = h.path(head);
        let mut acc = BigUint::zero();
        for &u in &path {
            pos[u] = acc.clone();
            acc += 1u32;
            for &v in light_children(ports, u) {
                pos[v] = acc.clone();
                acc += &span[v];
            }
        }
        let mut extent = acc.clone();
        for &u in &path {
            let need = &acc - &pos[u];
            texp[u] = min_exp(&need, b);
            let end = &pos[u] + pow_floor(texp[u], b);
            if end > extent {
                extent = end;
            }
        }
        if round_heads {
            texp[head] = min_exp(&extent, b);
            extent = pow_floor(texp[head], b);
        }
        span[head] = extent;
    }
    let start = absolute_starts(t, h, &pos);
    Shifted { start, t: texp, span }
}

/// Encodes ancestry labels; light children are visited in canonical order.
pub fn encode_ancestry(t: &Tree, b: u32, audit: &mut Audit) -> Result<Vec<AncestryLabel>, SchemeError> {
    if b == 0 {
        return Err(SchemeError::BadParam("b must be positive".into()));
    }
    let h = decompose(t);
    let ports = canonical_ports(t, &h);
    let s = shift(t, &h, &ports, b, false);
    let n = t.len();
    let rhs = floor_mul_pow2(&BigUint::from(n), ceil_log2(n as u64) as u64, b);
    if !audit.check(Anchor::RootSpanBound, 0, &s.span[0], &rhs) {
        return Err(SchemeError::Invariant { anchor: Anchor::RootSpanBound, node: 0 });
    }
    Ok(s.start.into_iter().zip(s.t).map(|(start, t)| AncestryLabel { start, t }).collect())
}

/// True when `u` is a proper ancestor of `w`.
pub fn is_ancestor(b: u32, lu: &AncestryLabel, lw: &AncestryLabel) -> bool {
    lw.start > lu.start && lw.start < &lu.start + lu.bound(b)
}
