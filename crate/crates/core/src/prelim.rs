//! Routing for general trees with big/small light children.
//!
//! Big light children (within `c` levels of their parent) are laid out
//! like ancestry intervals and described by how many of them have each
//! possible extent. Small ones share one interval cut harmonically: the
//! `j`-th small child gets `⌊small′/j⌋` IDs.

use num_bigint::BigUint;
use num_integer::Roots;
use num_traits::{ToPrimitive, Zero};

use crate::audit::{Anchor, Audit};
use crate::codec::{floor_mul_pow2, min_exp, pack_parts, pow_floor, unpack_parts, Bits};
use crate::error::{malformed, SchemeError};
use crate::layout::{
    absolute_starts, big_part, ceil_log2_big, expect_parts, heads_bottom_up, light_children, read_fields,
    read_u64_part, u64_part,
};
use crate::tree::{canonical_ports, ceil_log2, decompose, PortAssignment, Tree};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrelimCtx {
    pub b: u32,
    pub c: u32,
    pub n: usize,
}

impl PrelimCtx {
    /// Parameters balancing the three label terms for a tree of `n` nodes.
    pub fn with_defaults(n: usize) -> PrelimCtx {
        let l = ceil_log2(n.max(2) as u64).max(1) as u64;
        let ll = ceil_log2(l).max(1) as u64;
        let b = (l / (ll * ll)).nth_root(4).max(1);
        let x = l * ll * ll;
        let mut c = x.nth_root(4);
        if c.pow(4) < x {
            c += 1;
        }
        PrelimCtx { b: b as u32, c: c.max(1) as u32, n }
    }

    fn logn(&self) -> u64 {
        ceil_log2(self.n.max(1) as u64).max(1) as u64
    }

    /// `⌊s · 2^{2L/b} · (2⌈log n⌉)^{⌊L/c⌋}⌋`.
    fn head_budget(&self, size: &BigUint, level: u64) -> BigUint {
        let x = size * BigUint::from(2 * self.logn()).pow((level / self.c as u64) as u32);
        floor_mul_pow2(&x, 2 * level, self.b)
    }

    /// Largest `t` with `⌊2^{t/b}⌋` within the head budget.
    fn head_exp(&self, size: &BigUint, level: u64) -> u64 {
        min_exp(&(self.head_budget(size, level) + 1u32), self.b) - 1
    }

    /// Exponents a big child of a node at `level` can carry, as an inclusive range.
    pub fn big_exp_range(&self, level: u32) -> Option<(u64, u64)> {
        if level == 0 {
            return None;
        }
        let lo_level = (level as i64 - self.c as i64 + 1).max(0) as u64;
        let hi_level = level as u64 - 1;
        if lo_level > hi_level {
            return None;
        }
        let lo = self.head_exp(&(BigUint::from(1u32) << lo_level), lo_level);
        let hi = self.head_exp(&((BigUint::from(1u32) << level) - 1u32), hi_level);
        Some((lo, hi))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrelimLabel {
    pub start: BigUint,
    pub t: u64,
    /// Exponent of `small′`, absent when there are no small children.
    pub small: Option<u64>,
    /// Big-child counts per exponent, lowest exponent first.
    pub rt: Vec<u64>,
    pub level: u32,
}

impl PrelimLabel {
    pub fn to_bits(&self, ctx: &PrelimCtx) -> Bits {
        let mut small = Bits::new();
        match self.small {
            None => small.push(false),
            Some(ts) => {
                small.push(true);
                small.extend(&Bits::minimal(ts));
            }
        }
        let mut rt = Bits::new();
        for &x in &self.rt {
            rt.push_u64(x, ctx.c);
        }
        pack_parts(&[
            big_part(&self.start),
            u64_part(self.t),
            small,
            rt,
            u64_part(self.level as u64),
        ])
    }

    pub fn from_bits(bits: &Bits, ctx: &PrelimCtx) -> Result<PrelimLabel, SchemeError> {
        let parts = unpack_parts(bits)?;
        expect_parts(&parts, 5, "prelim")?;
        let sp = &parts[2];
        let small = match sp.len() {
            0 => return Err(malformed("missing small marker")),
            1 if !sp.get(0) => None,
            _ if sp.get(0) => {
                let mut r = sp.reader();
                r.read_bit()?;
                let rest = r.read_bits(sp.len() - 1)?;
                Some(read_u64_part(&rest)?)
            }
            _ => return Err(malformed("bad small marker")),
        };
        let level = read_u64_part(&parts[4])?;
        let level = u32::try_from(level).map_err(|_| malformed("level too large"))?;
        let rt = if parts[3].is_empty() { Vec::new() } else { read_fields(&parts[3], ctx.c)? };
        let expected = ctx.big_exp_range(level).map_or(0, |(lo, hi)| (hi - lo + 1) as usize);
        if rt.len() != expected {
            return Err(malformed("routing table size does not match the level"));
        }
        Ok(PrelimLabel { start: parts[0].to_big(), t: read_u64_part(&parts[1])?, small, rt, level })
    }
}

/// Total length of the harmonic interval for a rounded small total.
fn harmonic_len(small: &BigUint) -> BigUint {
    small * (ceil_log2_big(small) + 1)
}

pub fn encode_prelim(
    t: &Tree,
    ctx: &PrelimCtx,
    audit: &mut Audit,
) -> Result<(Vec<PrelimLabel>, PortAssignment), SchemeError> {
    if ctx.b == 0 || ctx.c == 0 {
        return Err(SchemeError::BadParam("b and c must be positive".into()));
    }
    if ctx.c > 63 {
        return Err(SchemeError::BadParam("c must be below 64".into()));
    }
    if ctx.n != t.len() {
        return Err(SchemeError::BadParam("context size does not match the tree".into()));
    }
    let n = t.len();
    let h = decompose(t);
    let ports = canonical_ports(t, &h);
    let mut pos = vec![BigUint::zero(); n];
    let mut texp = vec![0u64; n];
    let mut span = vec![BigUint::zero(); n];
    let mut small_exp: Vec<Option<u64>> = vec![None; n];
    let mut rt: Vec<Vec<u64>> = vec![Vec::new(); n];
    let cap = 1u64 << ctx.c;

    for head in heads_bottom_up(&h, n) {
        let path = h.path(head);
        let mut acc = BigUint::zero();
        for &u in &path {
            pos[u] = acc.clone();
            acc += 1u32;
            let lights = light_children(&ports, u);
            // Extents must not increase along port order, so raise them to a suffix maximum.
            let mut run = 0u64;
            for &v in lights.iter().rev() {
                run = run.max(texp[v]);
                if texp[v] < run {
                    texp[v] = run;
                    span[v] = pow_floor(run, ctx.b);
                }
            }
            let lu = h.level(u);
            let range = ctx.big_exp_range(lu);
            if let Some((lo, hi)) = range {
                rt[u] = vec![0; (hi - lo + 1) as usize];
            }
            let is_big = |v: usize| h.level(v) + ctx.c > lu;
            let (big, small): (Vec<usize>, Vec<usize>) = lights.iter().partition(|&&v| is_big(v));
            for &v in &big {
                pos[v] = acc.clone();
                acc += &span[v];
                let (lo, hi) = range.expect("big children imply a nonempty exponent range");
                if texp[v] < lo || texp[v] > hi {
                    return Err(SchemeError::Invariant { anchor: Anchor::PrelimHeadSpan, node: v });
                }
                let slot = &mut rt[u][(texp[v] - lo) as usize];
                *slot += 1;
                if *slot >= cap {
                    return Err(SchemeError::BadParam(format!("more than {} big children", cap - 1)));
                }
            }
            if !small.is_empty() {
                let total: BigUint = small.iter().map(|&v| &span[v]).sum();
                let ts = min_exp(&total, ctx.b);
                let rounded = pow_floor(ts, ctx.b);
                let mut offset = BigUint::zero();
                for (j, &v) in small.iter().enumerate() {
                    let slot = &rounded / (j as u64 + 1);
                    if !audit.check(Anchor::HarmonicFit, v, &span[v], &slot) {
                        return Err(SchemeError::Invariant { anchor: Anchor::HarmonicFit, node: v });
                    }
                    pos[v] = &acc + &offset;
                    offset += slot;
                }
                acc += harmonic_len(&rounded);
                small_exp[u] = Some(ts);
            }
        }
        let mut extent = acc.clone();
        for &u in &path {
            texp[u] = min_exp(&(&acc - &pos[u]), ctx.b);
            let end = &pos[u] + pow_floor(texp[u], ctx.b);
            if end > extent {
                extent = end;
            }
        }
        let level = h.level(head) as u64;
        let forced = ctx.head_exp(&BigUint::from(h.size(head)), level);
        audit.check(Anchor::PrelimHeadSpan, head, &extent, &pow_floor(forced, ctx.b));
        texp[head] = forced.max(min_exp(&extent, ctx.b));
        span[head] = pow_floor(texp[head], ctx.b);
    }
    let start = absolute_starts(t, &h, &pos);
    let labels = start
        .into_iter()
        .enumerate()
        .map(|(u, start)| PrelimLabel {
            start,
            t: texp[u],
            small: small_exp[u],
            rt: std::mem::take(&mut rt[u]),
            level: h.level(u),
        })
        .collect();
    Ok((labels, ports))
}

/// First hop from `u` towards `w`.
pub fn route_prelim(ctx: &PrelimCtx, lu: &PrelimLabel, lw: &PrelimLabel) -> u32 {
    if lw.start <= lu.start {
        return 0;
    }
    let q = &lw.start - &lu.start;
    if q >= pow_floor(lu.t, ctx.b) {
        return 0;
    }
    let q = q - 1u32;
    let mut sum = BigUint::zero();
    let mut before = 0u64;
    if let Some((lo, _)) = ctx.big_exp_range(lu.level) {
        for (i, &cnt) in lu.rt.iter().enumerate().rev() {
            if cnt == 0 {
                continue;
            }
            let val = pow_floor(lo + i as u64, ctx.b);
            let block = &val * cnt;
            if q < &sum + &block {
                let idx = ((&q - &sum) / &val).to_u64().expect("index fits");
                return (2 + before + idx) as u32;
            }
            sum += block;
            before += cnt;
        }
    }
    if let Some(ts) = lu.small {
        let rounded = pow_floor(ts, ctx.b);
        let r = &q - &sum;
        if r < harmonic_len(&rounded) {
            let mut acc = BigUint::zero();
            let mut j = 1u64;
            loop {
                acc += &rounded / j;
                if r < acc {
                    return (1 + before + j) as u32;
                }
                j += 1;
            }
        }
    }
    1
}
