//! Routing with a per-node rounding parameter chosen from the light weight,
//! a reserved run of `2·lw(u)` IDs before every node so its start is
//! aligned, and bounds in base `2^{1/⌈log n⌉}`.

use std::sync::Arc;

use num_bigint::BigUint;

use crate::audit::{Anchor, Audit};
use crate::codec::{decode_monotone, encode_monotone, floor_mul_pow2, pack_parts, pow_floor, unpack_parts, Bits};
use crate::error::{malformed, SchemeError};
use crate::interm::{class_levels, route_regions, MIN_B};
use crate::layout::{big_part, ceil_log2_big, expect_parts, read_u64_part, u64_part};
use crate::plan::{fill_groups, pregroup_count, Growth, PlanCache, Rule};
use crate::segments::{assign_ids, uniform_runs, AssignRule, VirtualTree, ARTIFICIAL_LEAVES};
use crate::tree::{canonical_ports, ceil_log2, decompose, floor_log2, PortAssignment, Tree};

/// Exponent constant `c` in the per-level factor `2^{14c⌈log k⌉/k}`.
pub const GROWTH_C: u32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FinalCtx {
    pub n: usize,
}

impl FinalCtx {
    /// `⌈log₂ n′⌉` for the tree with artificial leaves, `n′ = 18n`.
    pub fn logn(&self) -> u32 {
        ceil_log2((ARTIFICIAL_LEAVES + 1) * self.n.max(1) as u64).max(1)
    }
}

/// `max(6, ⌊log lw⌋ / (2(⌊log ⌊log lw⌋⌋ + 3)))`.
pub fn node_b(floor_log_lw: u32) -> u32 {
    let ll = floor_log2(floor_log_lw.max(1) as u64);
    (floor_log_lw / (2 * (ll + 3))).max(MIN_B)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinalLabel {
    /// Start with its trailing zeros removed.
    pub start_hi: BigUint,
    pub tz: u64,
    pub t: u64,
    pub rt: Bits,
    pub floor_log_lw: u32,
    pub level: u32,
    pub pregroups: u32,
    pub has_children: bool,
}

impl FinalLabel {
    pub fn start(&self) -> BigUint {
        &self.start_hi << self.tz
    }

    pub fn to_bits(&self) -> Bits {
        pack_parts(&[
            big_part(&self.start_hi),
            u64_part(self.tz),
            u64_part(self.t),
            self.rt.clone(),
            u64_part(self.floor_log_lw as u64),
            u64_part(self.level as u64),
            u64_part(self.pregroups as u64),
            u64_part(self.has_children as u64),
        ])
    }

    pub fn from_bits(bits: &Bits) -> Result<FinalLabel, SchemeError> {
        let p = unpack_parts(bits)?;
        expect_parts(&p, 8, "final")?;
        Ok(FinalLabel {
            start_hi: p[0].to_big(),
            tz: read_u64_part(&p[1])?,
            t: read_u64_part(&p[2])?,
            rt: p[3].clone(),
            floor_log_lw: small(&p[4])?,
            level: small(&p[5])?,
            pregroups: small(&p[6])?,
            has_children: match read_u64_part(&p[7])? {
                0 => false,
                1 => true,
                _ => return Err(malformed("child flag must be one bit")),
            },
        })
    }
}

pub(crate) fn small(b: &Bits) -> Result<u32, SchemeError> {
    u32::try_from(read_u64_part(b)?).map_err(|_| malformed("field out of range"))
}

pub(crate) fn split_start(start: &BigUint) -> (BigUint, u64) {
    let tz = start.trailing_zeros().unwrap_or(0);
    (start >> tz, tz)
}

/// Checks shared by the aligned-start encoders: every node with light
/// children starts on a multiple of `2^{⌈log lw⌉}`, and the whole tree fits
/// `G(n′, ⌈log n′⌉)`.
pub(crate) fn check_alignment(
    vt: &VirtualTree<'_>,
    start: &[BigUint],
    root_span: &BigUint,
    growth: &Growth,
    audit: &mut Audit,
) -> Result<(), SchemeError> {
    for (u, s) in start.iter().enumerate() {
        let lw = vt.lw(u);
        if lw == 0 {
            continue;
        }
        let need = ceil_log2_big(&BigUint::from(lw));
        let tz = s.trailing_zeros().unwrap_or(need);
        if !audit.check_u64(Anchor::StartTrailingZeros, u, need, tz) {
            return Err(SchemeError::Invariant { anchor: Anchor::StartTrailingZeros, node: u });
        }
    }
    let n_virtual = vt.size(vt.t.root());
    let rhs = growth.value(n_virtual, growth.logn());
    if !audit.check(Anchor::RootSpanBound, 0, root_span, &rhs) {
        return Err(SchemeError::Invariant { anchor: Anchor::RootSpanBound, node: 0 });
    }
    Ok(())
}

pub fn encode_final(
    t: &Tree,
    ctx: &FinalCtx,
    audit: &mut Audit,
) -> Result<(Vec<FinalLabel>, PortAssignment), SchemeError> {
    if ctx.n != t.len() {
        return Err(SchemeError::BadParam("context size does not match the tree".into()));
    }
    let h = decompose(t);
    let ports = canonical_ports(t, &h);
    let vt = VirtualTree { t, h: &h, ports: &ports, leaves: ARTIFICIAL_LEAVES };
    let logn = ctx.logn();
    let growth = Growth::new(logn, GROWTH_C);
    let cache = PlanCache::new(Rule::Growth(growth.clone()));
    let n = t.len();
    let mut plans = Vec::with_capacity(n);
    let mut meta = Vec::with_capacity(n);
    for u in 0..n {
        let members = vt.members(u);
        let lw = vt.lw(u);
        let fl = floor_log2(lw);
        let l = class_levels(fl, vt.level(u));
        let b = node_b(fl);
        let classes = cache.classes(b, l);
        let c = pregroup_count(members.len() as u64);
        let groups = cache.groups(b, c);
        let slots = fill_groups(&members, &classes, &groups);
        let seq: Vec<u64> = slots.iter().filter(|g| g.count > 0).map(|g| g.class).collect();
        let z = classes.len() as u64;
        let rt = encode_monotone(&seq, z)?;
        let real = members.len() - vt.artificial_light(u) as usize;
        if audit.enabled() {
            audit.check_u64(Anchor::MonotoneCodeLength, u, rt.len() as u64, 2 * z.max(seq.len() as u64));
            audit.check_u64(Anchor::RtWithinFreedBits, u, rt.len() as u64, ceil_log2(lw) as u64);
            for &size in &members[..real] {
                let k = l - floor_log2(size);
                let bound = classes.value(classes.index_of(size));
                let rhs = floor_mul_pow2(&growth.head(size), 6 * k as u64, b);
                audit.check(Anchor::ClassBoundaryFactor, u, &bound, &rhs);
            }
        }
        plans.push(uniform_runs(slots.iter().map(|g| (g.count, classes.value(g.class))), real));
        meta.push((rt, fl, c));
    }
    let sl = |x: u64| growth.head(x);
    let rule = AssignRule { reserve: true, base: logn, sl: &sl, path_rhs: &sl, strict_total: true };
    let a = assign_ids(&vt, &plans, &rule, audit)?;
    check_alignment(&vt, &a.start, &a.span[t.root()], &growth, audit)?;
    let labels = a
        .start
        .iter()
        .zip(a.t)
        .zip(meta)
        .enumerate()
        .map(|(u, ((start, t_exp), (rt, fl, c)))| {
            let (start_hi, tz) = split_start(start);
            FinalLabel {
                start_hi,
                tz,
                t: t_exp,
                rt,
                floor_log_lw: fl,
                level: vt.level(u),
                pregroups: c,
                has_children: t.degree(u) > 0,
            }
        })
        .collect();
    Ok((labels, ports))
}

#[derive(Clone, Debug)]
pub struct FinalPrepared {
    pub start: BigUint,
    pub bound: BigUint,
    counts: Arc<Vec<u64>>,
    values: Vec<BigUint>,
}

#[derive(Debug)]
pub struct FinalDecoder {
    logn: u32,
    cache: PlanCache,
}

impl FinalDecoder {
    pub fn new(ctx: &FinalCtx) -> FinalDecoder {
        let logn = ctx.logn();
        FinalDecoder { logn, cache: PlanCache::new(Rule::Growth(Growth::new(logn, GROWTH_C))) }
    }

    pub fn prepare(&self, l: &FinalLabel) -> Result<FinalPrepared, SchemeError> {
        let start = l.start();
        let bound = pow_floor(l.t, self.logn);
        if !l.has_children || l.pregroups == 0 {
            return Ok(FinalPrepared { start, bound, counts: Arc::default(), values: Vec::new() });
        }
        let b = node_b(l.floor_log_lw);
        let classes = self.cache.classes(b, class_levels(l.floor_log_lw, l.level));
        let counts = self.cache.groups(b, l.pregroups);
        let nonempty = counts.iter().filter(|&&c| c > 0).count();
        let seq = decode_monotone(&l.rt, classes.len() as u64, nonempty)?;
        let values = seq.iter().map(|&i| classes.value(i)).collect();
        Ok(FinalPrepared { start, bound, counts, values })
    }

    pub fn route_prepared(&self, u: &FinalPrepared, w: &FinalPrepared) -> u32 {
        route_regions(&u.start, &u.bound, &w.start, &u.counts, &u.values)
    }

    /// First hop from `u` towards a node whose start is `sw`.
    pub fn route_to_start(&self, u: &FinalPrepared, sw: &BigUint) -> u32 {
        route_regions(&u.start, &u.bound, sw, &u.counts, &u.values)
    }

    pub fn route(&self, lu: &FinalLabel, lw: &FinalLabel) -> u32 {
        match self.prepare(lu) {
            Ok(p) => self.route_to_start(&p, &lw.start()),
            Err(_) => 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{gen_tree, oracle_first_hop, parse_tree, TreeKind};

    fn sweep(t: &Tree) {
        let ctx = FinalCtx { n: t.len() };
        let mut audit = Audit::new(true);
        let (l, p) = encode_final(t, &ctx, &mut audit).unwrap();
        assert!(p.is_canonical(&decompose(t)));
        let d = FinalDecoder::new(&ctx);
        let prep: Vec<_> = l.iter().map(|x| d.prepare(x).unwrap()).collect();
        for u in 0..t.len() {
            for w in 0..t.len() {
                if u != w {
                    let want = oracle_first_hop(t, &p, u, w).unwrap();
                    assert_eq!(d.route_prepared(&prep[u], &prep[w]), want, "u={u} w={w}");
                }
            }
        }
        for r in audit.failures() {
            assert_eq!(r.anchor, Anchor::RtWithinFreedBits, "{r}");
        }
    }

    #[test]
    fn aligned_placement() {
        // lw = 4 with the accumulator at 5: 5 + 7 = 12, aligned to 4.
        let lw = 4u64;
        let mut a = BigUint::from(5u32) + (2 * lw - 1);
        let k = ceil_log2_big(&BigUint::from(lw));
        a = (a >> k) << k;
        assert_eq!(a, BigUint::from(12u32));
        assert_eq!(a + 1u32, BigUint::from(13u32));
    }

    #[test]
    fn node_b_clamped() {
        assert_eq!(node_b(4), 6);
        assert_eq!(node_b(24), 6);
        assert_eq!(node_b(200), 10);
    }

    #[test]
    fn single_node() {
        let t = parse_tree("1\n").unwrap();
        let (l, _) = encode_final(&t, &FinalCtx { n: 1 }, &mut Audit::disabled()).unwrap();
        assert!(!l[0].has_children);
        assert_eq!(FinalLabel::from_bits(&l[0].to_bits()).unwrap(), l[0]);
    }

    #[test]
    fn oracle_sweeps() {
        for kind in [
            TreeKind::Path,
            TreeKind::Star,
            TreeKind::Caterpillar,
            TreeKind::CompleteBinary,
            TreeKind::RandomAttachment,
            TreeKind::LowerBound(3),
        ] {
            for n in [1usize, 2, 3, 9, 40] {
                if let Ok(t) = gen_tree(kind, n, 5) {
                    sweep(&t);
                }
            }
        }
        sweep(&gen_tree(TreeKind::Caterpillar, 300, 0).unwrap());
    }

    #[test]
    fn pack_round_trip() {
        let t = gen_tree(TreeKind::RandomAttachment, 60, 4).unwrap();
        let (l, _) = encode_final(&t, &FinalCtx { n: 60 }, &mut Audit::disabled()).unwrap();
        for x in &l {
            assert_eq!(&FinalLabel::from_bits(&x.to_bits()).unwrap(), x);
        }
    }
}
