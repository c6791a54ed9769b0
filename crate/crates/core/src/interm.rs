//! Routing with doubly rounded segments: light children round their
//! reserved lengths up to a class boundary, then to the largest value in
//! their group, so the routing table is one monotone code over class indices.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::audit::{Anchor, Audit};
use crate::codec::{decode_monotone, encode_monotone, floor_mul_pow2, pack_parts, pow_floor, unpack_parts, Bits};
use crate::error::SchemeError;
use crate::layout::{big_part, expect_parts, read_u64_part, u64_part};
use crate::plan::{fill_groups, interm_boundary, locate, pregroup_count, PlanCache, Rule};
use crate::segments::{assign_ids, uniform_runs, AssignRule, NodePlan, VirtualTree, ARTIFICIAL_LEAVES};
use crate::tree::{canonical_ports, ceil_log2, decompose, floor_log2, PortAssignment, Tree};

/// Smallest `b` for which the length analysis applies.
pub const MIN_B: u32 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntermCtx {
    pub b: u32,
    pub n: usize,
}

impl IntermCtx {
    /// `b = max(6, requested)`, defaulting to `⌈√(log n / log log n)⌉`.
    pub fn new(n: usize, requested: Option<u32>) -> IntermCtx {
        let b = requested.unwrap_or_else(|| default_b(n));
        IntermCtx { b: b.max(MIN_B), n }
    }

    /// Uses `b` as given, even below the analysed range.
    pub fn unclamped(n: usize, b: u32) -> IntermCtx {
        IntermCtx { b, n }
    }
}

/// `⌈√(⌈log n⌉ / ⌈log log n⌉)⌉`, at least 1.
pub fn default_b(n: usize) -> u32 {
    let l = ceil_log2(n.max(2) as u64).max(1) as f64;
    let ll = ceil_log2(l as u64).max(1) as f64;
    ((l / ll).sqrt().ceil() as u32).max(1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntermLabel {
    pub start: BigUint,
    pub t: u64,
    pub rt: Bits,
    pub floor_log_lw: u32,
    pub level: u32,
    /// Number of pregroups among the light children (0 without any).
    pub pregroups: u32,
}

impl IntermLabel {
    pub fn to_bits(&self) -> Bits {
        pack_parts(&[
            big_part(&self.start),
            u64_part(self.t),
            self.rt.clone(),
            u64_part(self.floor_log_lw as u64),
            u64_part(self.level as u64),
            u64_part(self.pregroups as u64),
        ])
    }

    pub fn from_bits(bits: &Bits) -> Result<IntermLabel, SchemeError> {
        let p = unpack_parts(bits)?;
        expect_parts(&p, 6, "interm")?;
        Ok(IntermLabel {
            start: p[0].to_big(),
            t: read_u64_part(&p[1])?,
            rt: p[2].clone(),
            floor_log_lw: small(&p[3])?,
            level: small(&p[4])?,
            pregroups: small(&p[5])?,
        })
    }
}

fn small(b: &Bits) -> Result<u32, SchemeError> {
    u32::try_from(read_u64_part(b)?).map_err(|_| crate::error::malformed("field out of range"))
}

/// `l = min(⌊log lw⌋ + 1, level)`.
pub(crate) fn class_levels(floor_log_lw: u32, level: u32) -> u32 {
    (floor_log_lw + 1).min(level)
}

pub fn encode_interm(
    t: &Tree,
    ctx: &IntermCtx,
    audit: &mut Audit,
) -> Result<(Vec<IntermLabel>, PortAssignment), SchemeError> {
    encode_with(t, ctx, ARTIFICIAL_LEAVES, audit)
}

pub(crate) fn encode_with(
    t: &Tree,
    ctx: &IntermCtx,
    leaves: u64,
    audit: &mut Audit,
) -> Result<(Vec<IntermLabel>, PortAssignment), SchemeError> {
    if ctx.b == 0 {
        return Err(SchemeError::BadParam("b must be positive".into()));
    }
    if ctx.n != t.len() {
        return Err(SchemeError::BadParam("context size does not match the tree".into()));
    }
    let b = ctx.b;
    let h = decompose(t);
    let ports = canonical_ports(t, &h);
    let vt = VirtualTree { t, h: &h, ports: &ports, leaves };
    let cache = PlanCache::new(Rule::Interm);
    let n = t.len();
    let mut plans = Vec::with_capacity(n);
    let mut meta = Vec::with_capacity(n);
    for u in 0..n {
        let members = vt.members(u);
        if members.is_empty() {
            plans.push(NodePlan::default());
            meta.push((Bits::new(), 0, 0));
            continue;
        }
        let fl = floor_log2(vt.lw(u));
        let l = class_levels(fl, vt.level(u));
        let classes = cache.classes(b, l);
        let c = pregroup_count(members.len() as u64);
        let groups = cache.groups(b, c);
        let slots = fill_groups(&members, &classes, &groups);
        let seq: Vec<u64> = slots.iter().filter(|g| g.count > 0).map(|g| g.class).collect();
        let z = classes.len() as u64;
        let rt = encode_monotone(&seq, z)?;
        if audit.enabled() {
            let budget = 2 * z.max(seq.len() as u64);
            audit.check_u64(Anchor::MonotoneCodeLength, u, rt.len() as u64, budget);
            // The factor bound only holds for b >= 6.
            let real = if b >= MIN_B { members.len() - vt.artificial_light(u) as usize } else { 0 };
            for &size in &members[..real] {
                let k = l - floor_log2(size);
                let sl = interm_boundary(size, b);
                let bound = classes.value(classes.index_of(size));
                audit.check(Anchor::ClassBoundaryFactor, u, &bound, &floor_mul_pow2(&sl, 3 * k as u64, b));
            }
        }
        let real = members.len() - vt.artificial_light(u) as usize;
        plans.push(uniform_runs(slots.iter().map(|g| (g.count, classes.value(g.class))), real));
        meta.push((rt, fl, c));
    }
    let sl = move |x: u64| interm_boundary(x, b);
    let path_rhs = move |x: u64| {
        let level = floor_log2(x) as u64;
        floor_mul_pow2(&BigUint::from(x), (12 * level).saturating_sub(1), b)
    };
    let rule = AssignRule { reserve: false, base: b, sl: &sl, path_rhs: &path_rhs, strict_total: b >= MIN_B };
    let a = assign_ids(&vt, &plans, &rule, audit)?;
    let labels = a
        .start
        .into_iter()
        .zip(a.t)
        .zip(meta)
        .enumerate()
        .map(|(u, ((start, t), (rt, fl, c)))| IntermLabel {
            start,
            t,
            rt,
            floor_log_lw: fl,
            level: vt.level(u),
            pregroups: c,
        })
        .collect();
    Ok((labels, ports))
}

/// A label with its routing table expanded for repeated queries.
#[derive(Clone, Debug)]
pub struct IntermPrepared {
    pub start: BigUint,
    pub bound: BigUint,
    counts: Arc<Vec<u64>>,
    values: Vec<BigUint>,
}

/// Decoder holding the class and group tables for one `b`.
#[derive(Debug)]
pub struct IntermDecoder {
    b: u32,
    cache: PlanCache,
}

impl IntermDecoder {
    pub fn new(ctx: &IntermCtx) -> IntermDecoder {
        IntermDecoder { b: ctx.b, cache: PlanCache::new(Rule::Interm) }
    }

    pub fn prepare(&self, l: &IntermLabel) -> Result<IntermPrepared, SchemeError> {
        let bound = pow_floor(l.t, self.b);
        if l.pregroups == 0 {
            return Ok(IntermPrepared { start: l.start.clone(), bound, counts: Arc::default(), values: Vec::new() });
        }
        let classes = self.cache.classes(self.b, class_levels(l.floor_log_lw, l.level));
        let counts = self.cache.groups(self.b, l.pregroups);
        let nonempty = counts.iter().filter(|&&c| c > 0).count();
        let seq = decode_monotone(&l.rt, classes.len() as u64, nonempty)?;
        let values = seq.iter().map(|&i| classes.value(i)).collect();
        Ok(IntermPrepared { start: l.start.clone(), bound, counts, values })
    }

    pub fn route_prepared(&self, u: &IntermPrepared, w: &IntermPrepared) -> u32 {
        route_regions(&u.start, &u.bound, &w.start, &u.counts, &u.values)
    }

    /// First hop from `u` towards the node whose start is `sw`.
    pub fn route_to_start(&self, u: &IntermPrepared, sw: &BigUint) -> u32 {
        route_regions(&u.start, &u.bound, sw, &u.counts, &u.values)
    }

    /// First hop from `u` towards `w`; malformed tables route nowhere.
    pub fn route(&self, lu: &IntermLabel, lw: &IntermLabel) -> u32 {
        match self.prepare(lu) {
            Ok(p) => route_regions(&p.start, &p.bound, &lw.start, &p.counts, &p.values),
            Err(_) => 0,
        }
    }
}

pub(crate) fn route_regions(
    su: &BigUint,
    bound: &BigUint,
    sw: &BigUint,
    counts: &[u64],
    values: &[BigUint],
) -> u32 {
    if sw <= su {
        return 0;
    }
    let q = sw - su;
    if &q >= bound {
        return 0;
    }
    if q.is_zero() {
        return 0;
    }
    locate(&q, counts, values).unwrap_or(1)
}

/// Labels for trees of small depth: the same encoder with `b = 1`.
pub fn encode_bounded_depth(t: &Tree, audit: &mut Audit) -> Result<(Vec<IntermLabel>, PortAssignment), SchemeError> {
    encode_interm(t, &IntermCtx::unclamped(t.len(), 1), audit)
}
