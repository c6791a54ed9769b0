//! Routing for bounded-degree trees: ancestry intervals plus the exact
//! (rounded) extent of every light child, stored as exponents.

use num_bigint::BigUint;

use crate::ancestry::shift;
use crate::audit::{Anchor, Audit};
use crate::codec::{floor_mul_pow2, pack_parts, pow_floor, unpack_parts, Bits};
use crate::error::SchemeError;
use crate::layout::{big_part, expect_parts, light_children, read_fields, read_u64_part, u64_part};
use crate::tree::{canonical_ports, ceil_log2, decompose, PortAssignment, Tree};

/// Decoder parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BdCtx {
    pub b: u32,
    pub n: usize,
}

impl BdCtx {
    /// Width of one routing-table exponent field.
    pub fn field_width(&self) -> u32 {
        let v = (self.b as u64 + 2) * (ceil_log2(self.n.max(1) as u64) as u64 + 1);
        64 - v.leading_zeros()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BdLabel {
    pub start: BigUint,
    pub t: u64,
    /// Extent exponents of the light children, in port order from port 2.
    pub rt: Vec<u64>,
}

impl BdLabel {
    pub fn to_bits(&self, ctx: &BdCtx) -> Bits {
        let w = ctx.field_width();
        let mut rt = Bits::new();
        for &x in &self.rt {
            rt.push_u64(x, w);
        }
        pack_parts(&[big_part(&self.start), u64_part(self.t), rt])
    }

    pub fn from_bits(bits: &Bits, ctx: &BdCtx) -> Result<BdLabel, SchemeError> {
        let parts = unpack_parts(bits)?;
        expect_parts(&parts, 3, "bd")?;
        let rt = if parts[2].is_empty() { Vec::new() } else { read_fields(&parts[2], ctx.field_width())? };
        Ok(BdLabel { start: parts[0].to_big(), t: read_u64_part(&parts[1])?, rt })
    }
}

pub fn encode_bd(
    t: &Tree,
    ctx: &BdCtx,
    audit: &mut Audit,
) -> Result<(Vec<BdLabel>, PortAssignment), SchemeError> {
    if ctx.b == 0 {
        return Err(SchemeError::BadParam("b must be positive".into()));
    }
    if ctx.n != t.len() {
        return Err(SchemeError::BadParam("context size does not match the tree".into()));
    }
    let h = decompose(t);
    let ports = canonical_ports(t, &h);
    let s = shift(t, &h, &ports, ctx.b, true);
    let n = t.len();
    let rhs = floor_mul_pow2(&BigUint::from(n), 2 * h.level(0) as u64, ctx.b);
    if !audit.check(Anchor::RootSpanBound, 0, &s.span[0], &rhs) {
        return Err(SchemeError::Invariant { anchor: Anchor::RootSpanBound, node: 0 });
    }
    let limit = 1u64 << ctx.field_width();
    let mut labels = Vec::with_capacity(n);
    for u in 0..n {
        let rt: Vec<u64> = light_children(&ports, u).iter().map(|&v| s.t[v]).collect();
        if let Some(&bad) = rt.iter().find(|&&x| x >= limit) {
            return Err(SchemeError::BadParam(format!("exponent {bad} overflows the routing-table field")));
        }
        labels.push(BdLabel { start: s.start[u].clone(), t: s.t[u], rt });
    }
    Ok((labels, ports))
}

/// First hop from `u` towards `w`.
pub fn route_bd(ctx: &BdCtx, lu: &BdLabel, lw: &BdLabel) -> u32 {
    if lw.start <= lu.start {
        return 0;
    }
    let q = &lw.start - &lu.start;
    if q >= pow_floor(lu.t, ctx.b) {
        return 0;
    }
    let mut sum = BigUint::from(0u32);
    for (j, &x) in lu.rt.iter().enumerate() {
        sum += pow_floor(x, ctx.b);
        if q <= sum {
            return j as u32 + 2;
        }
    }
    1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{gen_tree, oracle_first_hop, TreeKind};

    fn run(kind: TreeKind, n: usize, b: u32) -> (Tree, Vec<BdLabel>, PortAssignment, BdCtx) {
        let t = gen_tree(kind, n, 3).unwrap();
        let ctx = BdCtx { b, n };
        let (l, p) = encode_bd(&t, &ctx, &mut Audit::disabled()).unwrap();
        (t, l, p, ctx)
    }

    #[test]
    fn leaf_has_empty_table() {
        let (_, l, _, _) = run(TreeKind::Star, 5, 2);
        assert!(l[3].rt.is_empty());
        assert_eq!(l[0].rt.len(), 3);
    }

    #[test]
    fn path_matches_ancestry() {
        let (_, l, _, ctx) = run(TreeKind::Path, 3, 1);
        let starts: Vec<u32> = l.iter().map(|x| x.start.clone().try_into().unwrap()).collect();
        let bounds: Vec<u32> =
            l.iter().map(|x| pow_floor(x.t, ctx.b).try_into().unwrap()).collect();
        assert_eq!(starts, vec![0, 1, 2]);
        assert_eq!(bounds, vec![4, 2, 1]);
        assert!(l.iter().all(|x| x.rt.is_empty()));
        assert_eq!(route_bd(&ctx, &l[0], &l[2]), 1);
    }

    #[test]
    fn complete_binary_seven() {
        let (t, l, p, ctx) = run(TreeKind::CompleteBinary, 7, 1);
        for u in [0, 1, 2] {
            assert_eq!(l[u].rt.len(), 1);
        }
        // Light child of the root is node 2 with subtree {2, 5, 6}; its
        // path 2-5 has accumulator 3, so the extent rounds to 4.
        assert_eq!(pow_floor(l[0].rt[0], 1), BigUint::from(4u32));
        assert_eq!(route_bd(&ctx, &l[0], &l[6]), 2);
        for u in 0..7 {
            for w in 0..7 {
                if u != w {
                    assert_eq!(route_bd(&ctx, &l[u], &l[w]), oracle_first_hop(&t, &p, u, w).unwrap());
                }
            }
        }
    }

    #[test]
    fn pack_round_trip() {
        let (_, l, _, ctx) = run(TreeKind::RandomAttachment, 50, 3);
        for x in &l {
            assert_eq!(&BdLabel::from_bits(&x.to_bits(&ctx), &ctx).unwrap(), x);
        }
    }
}
