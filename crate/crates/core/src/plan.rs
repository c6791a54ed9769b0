//! Classes and groups of a node's light children.
//!
//! Light children are first bucketed into *classes* by subtree size; every
//! class has one boundary value that its members' reserved segments round
//! up to. Children are then cut, in port order, into *groups* of
//! predetermined sizes, and every member of a group takes the largest
//! rounded length in that group. Only the class index of each group is
//! stored, so a node's routing table is a short monotone sequence.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::codec::{floor_mul_pow2, pow_ceil, UpperFixed};
use crate::tree::{ceil_log2, floor_log2};

/// Size ranges `[x₁, x₂]` of the classes for parameters `(b, l)`, sorted
/// ascending. Class `i` (1-based) is `ranges[i - 1]`; empty ranges
/// (`x₁ > x₂`) are kept so indices depend on `(b, l)` only.
pub fn class_ranges(b: u32, l: u32) -> Vec<(u64, u64)> {
    assert!(b > 0);
    let b64 = b as u64;
    let mut out = Vec::new();
    for k in 1..b.min(l + 1) {
        let x = (l - k) as u64;
        let k64 = k as u64;
        let top = 1u64 << (x + 1);
        for p in 1..=b64.div_ceil(k64) {
            let x1 = to_u64(&pow_ceil(x * b64 + (p - 1) * k64, b));
            let x2 = to_u64(&pow_ceil(x * b64 + p * k64, b)).min(top) - 1;
            out.push((x1, x2));
        }
    }
    let (mut j, mut z) = (b, 1u32);
    while j <= l {
        for p in 1..=b {
            let lo = j + (p - 1) * z;
            if lo > l {
                break;
            }
            let hi = (j + p * z - 1).min(l);
            out.push((1u64 << (l - hi), (1u64 << (l - lo + 1)) - 1));
        }
        j *= 2;
        z *= 2;
    }
    out.sort_unstable();
    out
}

fn to_u64(x: &BigUint) -> u64 {
    u64::try_from(x).expect("class range fits in 64 bits")
}

/// Number of pregroups (sizes 2, 4, 8, …) needed to hold `m` children.
pub fn pregroup_count(m: u64) -> u32 {
    ceil_log2(m + 2) - 1
}

/// Children held by `c` pregroups, dummies included.
pub fn pregroup_capacity(c: u32) -> u64 {
    (1u64 << (c + 1)) - 2
}

/// Group sizes for parameters `(b, c)`, in port order. Small pregroups are
/// split into near-equal parts (possibly empty), large ones merged in runs
/// mirroring the classes.
pub fn group_sizes(b: u32, c: u32) -> Vec<u64> {
    assert!(b > 0);
    let mut out = Vec::new();
    for k in 1..b.min(c + 1) {
        let s = 1u64 << k;
        let g = (b as u64).div_ceil(k as u64);
        for i in 0..g {
            out.push(s / g + u64::from(i < s % g));
        }
    }
    let (mut j, mut z) = (b, 1u32);
    while j <= c {
        for p in 1..=b {
            let lo = j + (p - 1) * z;
            if lo > c {
                break;
            }
            let hi = (j + p * z - 1).min(c);
            out.push((1u64 << (hi + 1)) - (1u64 << lo));
        }
        j *= 2;
        z *= 2;
    }
    out
}

/// `⌈x · 2^{num/den}⌉`.
pub fn ceil_mul_pow2(x: &BigUint, num: u64, den: u32) -> BigUint {
    let f = floor_mul_pow2(x, num, den);
    if x.is_zero() || num % den as u64 == 0 {
        f
    } else {
        f + 1u32
    }
}

/// Boundary rule of the intermediate scheme: `⌈x · 2^{12⌊log x⌋/b}⌉`.
pub fn interm_boundary(x: u64, b: u32) -> BigUint {
    ceil_mul_pow2(&BigUint::from(x), 12 * floor_log2(x) as u64, b)
}

/// The growth function `G(x, L) = ⌈2xL · 2^{L/logn} · ∏_{k≤L} 2^{14c⌈log k⌉/k}⌉`,
/// evaluated from cached upper approximations of the real factors.
#[derive(Clone, Debug)]
pub struct Growth {
    logn: u32,
    c: u32,
    factors: Vec<UpperFixed>,
}

impl Growth {
    const MAX_LEVEL: u32 = 64;

    pub fn new(logn: u32, c: u32) -> Growth {
        assert!(logn > 0);
        let mut factors = Vec::with_capacity(Self::MAX_LEVEL as usize + 1);
        let mut prod = UpperFixed::one();
        for l in 0..=Self::MAX_LEVEL {
            if l > 0 {
                let e = 14 * c as u64 * ceil_log2(l as u64) as u64;
                prod = prod.mul(&UpperFixed::pow2(e, l as u64));
            }
            let lead = UpperFixed::from_int(&BigUint::from(2 * l as u64));
            factors.push(lead.mul(&UpperFixed::pow2(l as u64, logn as u64)).mul(&prod));
        }
        Growth { logn, c, factors }
    }

    pub fn logn(&self) -> u32 {
        self.logn
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    /// `G(x, L)`, at least 1.
    pub fn value(&self, x: u64, l: u32) -> BigUint {
        let g = self.factors[l as usize].ceil_times(&BigUint::from(x));
        g.max(BigUint::one())
    }

    /// Reserved length of a heavy-path head of (virtual) size `x`.
    pub fn head(&self, x: u64) -> BigUint {
        self.value(x, floor_log2(x))
    }

    /// Boundary value of a class whose largest size is `x₂`: the head
    /// formula at `x₂`, so a class inside one level stays within `2^{k/b}`
    /// of its members' reservations.
    pub fn boundary(&self, x2: u64) -> BigUint {
        self.head(x2)
    }
}

/// Classes with their boundary values.
#[derive(Clone, Debug)]
pub struct Classes {
    pub ranges: Vec<(u64, u64)>,
    pub values: Vec<BigUint>,
}

impl Classes {
    pub fn build(b: u32, l: u32, boundary: impl Fn(u64) -> BigUint) -> Classes {
        let ranges = class_ranges(b, l);
        let values = ranges.iter().map(|&(_, x2)| boundary(x2)).collect();
        Classes { ranges, values }
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    /// 1-based index of the class containing `size`.
    pub fn index_of(&self, size: u64) -> u64 {
        let i = self.ranges.partition_point(|r| r.1 < size);
        assert!(
            i < self.ranges.len() && self.ranges[i].0 <= size,
            "size {size} outside every class"
        );
        i as u64 + 1
    }

    /// Boundary value of class `idx`; index 0 stands for a dummy and is 0.
    pub fn value(&self, idx: u64) -> BigUint {
        if idx == 0 {
            BigUint::zero()
        } else {
            self.values[idx as usize - 1].clone()
        }
    }
}

/// One group of a laid-out node: member count (dummies included) and the
/// class index of its first member.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupSlot {
    pub count: u64,
    pub class: u64,
}

/// Assigns members (sizes in port order) to the groups of sizes `groups`.
pub fn fill_groups(members: &[u64], classes: &Classes, groups: &[u64]) -> Vec<GroupSlot> {
    let mut pos = 0usize;
    groups
        .iter()
        .map(|&count| {
            let class = if count > 0 && pos < members.len() { classes.index_of(members[pos]) } else { 0 };
            pos += count as usize;
            GroupSlot { count, class }
        })
        .collect()
}

/// Port of the child whose segment holds offset `q` (1-based offset from
/// the node's own ID), when groups of `counts` hold segments `values` (one
/// per nonempty group). `None` means past the light region.
pub fn locate(q: &BigUint, counts: &[u64], values: &[BigUint]) -> Option<u32> {
    let mut s = BigUint::zero();
    let mut before = 0u64;
    let mut vals = values.iter();
    for &count in counts {
        if count == 0 {
            continue;
        }
        let v = vals.next()?;
        if !v.is_zero() {
            let end = &s + v * count;
            if *q <= end {
                let k = (q - &s).div_ceil(v);
                let k = u64::try_from(&k).ok()?;
                return Some((1 + before + k) as u32);
            }
            s = end;
        }
        before += count;
    }
    None
}

/// Memoized class and group tables for one boundary rule.
#[derive(Debug)]
pub struct PlanCache {
    rule: Rule,
    classes: RwLock<HashMap<(u32, u32), Arc<Classes>>>,
    groups: RwLock<HashMap<(u32, u32), Arc<Vec<u64>>>>,
}

#[derive(Clone, Debug)]
pub enum Rule {
    /// `⌈x₂ · 2^{12⌊log x₂⌋/b}⌉`.
    Interm,
    Growth(Growth),
}

impl PlanCache {
    pub fn new(rule: Rule) -> PlanCache {
        PlanCache { rule, classes: RwLock::default(), groups: RwLock::default() }
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn classes(&self, b: u32, l: u32) -> Arc<Classes> {
        if let Some(c) = self.classes.read().expect("plan cache lock").get(&(b, l)) {
            return c.clone();
        }
        let c = Arc::new(match &self.rule {
            Rule::Interm => Classes::build(b, l, |x| interm_boundary(x, b)),
            Rule::Growth(g) => Classes::build(b, l, |x| g.boundary(x)),
        });
        self.classes.write().expect("plan cache lock").insert((b, l), c.clone());
        c
    }

    pub fn groups(&self, b: u32, c: u32) -> Arc<Vec<u64>> {
        if let Some(g) = self.groups.read().expect("plan cache lock").get(&(b, c)) {
            return g.clone();
        }
        let g = Arc::new(group_sizes(b, c));
        self.groups.write().expect("plan cache lock").insert((b, c), g.clone());
        g
    }
}
