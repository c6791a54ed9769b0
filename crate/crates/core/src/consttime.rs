//! Routing with a constant number of word operations per query.
//!
//! Each node stores, per group of light children, the rounded prefix sum
//! `S` of the segments before the group, the exact number `C` of children
//! before it and the rounded segment length `L` inside it. The `S` values
//! sit in a rank dictionary keyed by their mantissa/exponent form, so one
//! rank query finds the group holding a destination.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::audit::{Anchor, Audit};
use crate::codec::{pack_parts, pow_floor, round_up, two_parts_round, two_parts_trunc, unpack_parts, Bits, RankDict};
use crate::error::{malformed, SchemeError};
use crate::final_scheme::{check_alignment, small, split_start};
use crate::interm::{class_levels, MIN_B};
use crate::layout::{big_part, expect_parts, read_u64_part, u64_part};
use crate::plan::{pregroup_count, Growth, PlanCache, Rule};
use crate::segments::{assign_ids, AssignRule, NodePlan, VirtualTree, ARTIFICIAL_LEAVES};
use crate::tree::{canonical_ports, ceil_log2, decompose, floor_log2, PortAssignment, Tree};

/// Divisor constant in `b = ⌊log lw⌋ / (c(⌊log ⌊log lw⌋⌋ + 3)²)`.
pub const B_DIVISOR: u32 = 1;
/// Exponent constant of the per-level factor, one above the plain scheme's
/// to absorb prefix-sum rounding.
pub const GROWTH_C: u32 = 3;
/// Fixed per-query operations besides the rank query.
pub const FIXED_OPS: u32 = 13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CtCtx {
    pub n: usize,
    ew: u32,
}

impl CtCtx {
    pub fn new(n: usize) -> CtCtx {
        let mut ctx = CtCtx { n, ew: 0 };
        let n_virtual = (ARTIFICIAL_LEAVES + 1) * n.max(1) as u64;
        let bits = ctx.growth().head(n_virtual).bits();
        ctx.ew = 64 - bits.leading_zeros();
        ctx
    }

    pub fn logn(&self) -> u32 {
        ceil_log2((ARTIFICIAL_LEAVES + 1) * self.n.max(1) as u64).max(1)
    }

    pub fn growth(&self) -> Growth {
        Growth::new(self.logn(), GROWTH_C)
    }

    /// Width of the exponent field: enough for any offset below the
    /// whole tree's reservation.
    pub fn exp_width(&self) -> u32 {
        self.ew
    }
}

pub fn node_b(floor_log_lw: u32) -> u32 {
    let ll = floor_log2(floor_log_lw.max(1) as u64) + 3;
    (floor_log_lw / (B_DIVISOR * ll * ll)).max(MIN_B)
}

/// Mantissa width `1 + ⌈log₂(b²(⌊log ⌊log lw⌋⌋ + 3))⌉`.
pub fn mantissa_bits(floor_log_lw: u32) -> u32 {
    let b = node_b(floor_log_lw) as u64;
    let ll = floor_log2(floor_log_lw.max(1) as u64) as u64 + 3;
    1 + ceil_log2(b * b * ll)
}

/// One group's entry: children before it and their segment length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupTuple {
    pub s: BigUint,
    pub c: u64,
    pub l: BigUint,
}

/// Tuples of one node plus the terminal prefix sum closing the light region.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PrefixTable {
    pub tuples: Vec<GroupTuple>,
    pub end: BigUint,
}

/// Lays out children with segment lengths `sl` (nonincreasing) into groups
/// of nominal sizes `groups`, rounding `L`, `C` and `S` to `mbits`
/// significant bits. A group whose rounded child count overshoots takes
/// children from later groups. Returns the table and every child's offset.
pub fn prefix_table(sl: &[BigUint], groups: &[u64], mbits: u32) -> (PrefixTable, Vec<BigUint>) {
    let m = sl.len() as u64;
    let mut tuples = Vec::new();
    let mut offsets = Vec::with_capacity(sl.len());
    let mut s = BigUint::zero();
    let mut c = 0u64;
    let mut e = 0u64;
    for &count in groups {
        e += count;
        if count == 0 || c >= e {
            continue;
        }
        if c >= m {
            break;
        }
        let l = round_up(&sl[c as usize], mbits);
        let next = round_up(&BigUint::from(e), mbits).to_u64().expect("child count fits");
        let cnt = next.min(m) - c;
        for i in 0..cnt {
            offsets.push(&s + &l * i);
        }
        let sum = &s + &l * cnt;
        tuples.push(GroupTuple { s: s.clone(), c, l });
        s = round_up(&sum, mbits);
        c += cnt;
        if c >= m {
            break;
        }
    }
    (PrefixTable { tuples, end: s }, offsets)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtLabel {
    pub start_hi: BigUint,
    pub tz: u64,
    pub t: u64,
    pub floor_log_lw: u32,
    pub level: u32,
    pub has_children: bool,
    pub table: PrefixTable,
}

impl CtLabel {
    pub fn start(&self) -> BigUint {
        &self.start_hi << self.tz
    }

    fn key(v: &BigUint, mbits: u32, ew: u32) -> u64 {
        two_parts_round(v, mbits).key(ew)
    }

    /// Dictionary over the `S` keys (terminal included) and the `(C, L)`
    /// array, in the packed forms stored in the label.
    pub fn tables(&self, ctx: &CtCtx) -> Result<(RankDict, Bits), SchemeError> {
        let mbits = mantissa_bits(self.floor_log_lw);
        let ew = ctx.exp_width();
        let w = mbits + ew;
        let mut keys: Vec<u64> = self.table.tuples.iter().map(|g| Self::key(&g.s, mbits, ew)).collect();
        keys.push(Self::key(&self.table.end, mbits, ew));
        let dict = RankDict::build(&keys, w)?;
        let mut arr = Bits::new();
        for g in &self.table.tuples {
            arr.push_u64(Self::key(&BigUint::from(g.c), mbits, ew), w);
            arr.push_u64(Self::key(&g.l, mbits, ew), w);
        }
        Ok((dict, arr))
    }

    pub fn to_bits(&self, ctx: &CtCtx) -> Result<Bits, SchemeError> {
        let (dict, arr) = self.tables(ctx)?;
        Ok(pack_parts(&[
            big_part(&self.start_hi),
            u64_part(self.tz),
            u64_part(self.t),
            u64_part(self.floor_log_lw as u64),
            u64_part(self.level as u64),
            u64_part(self.has_children as u64),
            dict.packed_bits(),
            arr,
        ]))
    }

    pub fn from_bits(bits: &Bits, ctx: &CtCtx) -> Result<CtLabel, SchemeError> {
        let p = unpack_parts(bits)?;
        expect_parts(&p, 8, "ct")?;
        let floor_log_lw = small(&p[3])?;
        let mbits = mantissa_bits(floor_log_lw);
        let w = (mbits + ctx.exp_width()) as usize;
        let value = |key: u64| BigUint::from(key & ((1u64 << mbits) - 1)) << (key >> mbits);
        if p[6].len() % (w + 1) != 0 || p[7].len() % (2 * w) != 0 {
            return Err(malformed("prefix table length does not match its field width"));
        }
        let mut r = p[6].reader();
        let mut sums = Vec::new();
        while !r.is_done() {
            if !r.read_bit()? {
                return Err(malformed("dictionary separator bit must be 1"));
            }
            sums.push(value(r.read_u64(w as u32)?));
        }
        let end = sums.pop().ok_or_else(|| malformed("dictionary lacks its terminal key"))?;
        let mut r = p[7].reader();
        let mut tuples = Vec::with_capacity(sums.len());
        for s in sums {
            let c = value(r.read_u64(w as u32)?).to_u64().ok_or_else(|| malformed("child count too large"))?;
            let l = value(r.read_u64(w as u32)?);
            tuples.push(GroupTuple { s, c, l });
        }
        if !r.is_done() {
            return Err(malformed("tuple array longer than the dictionary"));
        }
        Ok(CtLabel {
            start_hi: p[0].to_big(),
            tz: read_u64_part(&p[1])?,
            t: read_u64_part(&p[2])?,
            floor_log_lw,
            level: small(&p[4])?,
            has_children: read_u64_part(&p[5])? == 1,
            table: PrefixTable { tuples, end },
        })
    }
}

pub fn encode_ct(t: &Tree, ctx: &CtCtx, audit: &mut Audit) -> Result<(Vec<CtLabel>, PortAssignment), SchemeError> {
    if ctx.n != t.len() {
        return Err(SchemeError::BadParam("context size does not match the tree".into()));
    }
    let h = decompose(t);
    let ports = canonical_ports(t, &h);
    let vt = VirtualTree { t, h: &h, ports: &ports, leaves: ARTIFICIAL_LEAVES };
    let growth = ctx.growth();
    let logn = growth.logn();
    let cache = PlanCache::new(Rule::Growth(growth.clone()));
    let n = t.len();
    let mut plans = Vec::with_capacity(n);
    let mut tables = Vec::with_capacity(n);
    for u in 0..n {
        let members = vt.members(u);
        let lw = vt.lw(u);
        let fl = floor_log2(lw);
        let b = node_b(fl);
        let classes = cache.classes(b, class_levels(fl, vt.level(u)));
        let groups = cache.groups(b, pregroup_count(members.len() as u64));
        let sl: Vec<BigUint> = members.iter().map(|&x| classes.value(classes.index_of(x))).collect();
        let (table, mut offsets) = prefix_table(&sl, &groups, mantissa_bits(fl));
        offsets.truncate(members.len() - vt.artificial_light(u) as usize);
        plans.push(NodePlan { offsets, total: table.end.clone() });
        tables.push(table);
    }
    let sl = |x: u64| growth.head(x);
    let rule = AssignRule { reserve: true, base: logn, sl: &sl, path_rhs: &sl, strict_total: true };
    let a = assign_ids(&vt, &plans, &rule, audit)?;
    check_alignment(&vt, &a.start, &a.span[t.root()], &growth, audit)?;
    let mut labels = Vec::with_capacity(n);
    for (u, (start, table)) in a.start.iter().zip(tables).enumerate() {
        let (start_hi, tz) = split_start(start);
        let label = CtLabel {
            start_hi,
            tz,
            t: a.t[u],
            floor_log_lw: floor_log2(vt.lw(u)),
            level: vt.level(u),
            has_children: t.degree(u) > 0,
            table,
        };
        if audit.enabled() {
            let (dict, arr) = label.tables(ctx)?;
            let used = (dict.packed_bits().len() + arr.len()) as u64;
            audit.check_u64(Anchor::TupleBudget, u, used, ceil_log2(vt.lw(u)) as u64);
        }
        labels.push(label);
    }
    Ok((labels, ports))
}

/// A label with its dictionary built, ready for queries.
#[derive(Clone, Debug)]
pub struct CtPrepared {
    pub start: BigUint,
    pub bound: BigUint,
    dict: RankDict,
    tuples: Vec<GroupTuple>,
    mbits: u32,
}

/// Answer with the number of primitive steps taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountedPort {
    pub port: u32,
    pub ops: u32,
}

#[derive(Clone, Debug)]
pub struct CtDecoder {
    ctx: CtCtx,
    logn: u32,
    ew: u32,
}

impl CtDecoder {
    pub fn new(ctx: &CtCtx) -> CtDecoder {
        CtDecoder { ctx: *ctx, logn: ctx.logn(), ew: ctx.exp_width() }
    }

    pub fn prepare(&self, l: &CtLabel) -> Result<CtPrepared, SchemeError> {
        let (dict, _) = l.tables(&self.ctx)?;
        Ok(CtPrepared {
            start: l.start(),
            bound: pow_floor(l.t, self.logn),
            dict,
            tuples: l.table.tuples.clone(),
            mbits: mantissa_bits(l.floor_log_lw),
        })
    }

    pub fn route_counted(&self, u: &CtPrepared, sw: &BigUint) -> CountedPort {
        let mut ops = 3;
        if *sw <= u.start {
            return CountedPort { port: 0, ops };
        }
        let q = sw - &u.start;
        if q >= u.bound {
            return CountedPort { port: 0, ops };
        }
        let y = &q - 1u32;
        let tp = two_parts_trunc(&y, u.mbits);
        if tp.e >> self.ew != 0 {
            return CountedPort { port: 1, ops: ops + 2 };
        }
        let ans = u.dict.rank_counted(tp.key(self.ew) + 1);
        ops += ans.ops + 4;
        let Some(g) = ans.rank.checked_sub(1).and_then(|i| u.tuples.get(i)) else {
            return CountedPort { port: 1, ops };
        };
        let k = (&q - &g.s).div_ceil(&g.l);
        ops += FIXED_OPS - 7;
        CountedPort { port: (1 + g.c + k.to_u64().unwrap_or(u64::MAX)) as u32, ops }
    }

    pub fn route_prepared(&self, u: &CtPrepared, w: &CtPrepared) -> u32 {
        self.route_counted(u, &w.start).port
    }

    pub fn route(&self, lu: &CtLabel, lw: &CtLabel) -> u32 {
        match self.prepare(lu) {
            Ok(p) => self.route_counted(&p, &lw.start()).port,
            Err(_) => 0,
        }
    }
}
