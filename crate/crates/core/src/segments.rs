//! Shared machinery of the segment-reserving encoders: the tree with
//! virtual artificial leaves, and the top-down assignment of IDs once every
//! node's light region has been laid out.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::audit::{Anchor, Audit};
use crate::codec::{min_exp, pow_floor};
use crate::error::SchemeError;
use crate::layout::{ceil_log2_big, light_children};
use crate::tree::{floor_log2, HeavyDecomposition, PortAssignment, Tree};

/// Artificial leaves hung below every real node.
pub(crate) const ARTIFICIAL_LEAVES: u64 = 17;

/// The input tree with `leaves` virtual leaf children under every node.
/// Artificial children sort after all real ones, and a real leaf's heavy
/// child is artificial.
pub(crate) struct VirtualTree<'a> {
    pub t: &'a Tree,
    pub h: &'a HeavyDecomposition,
    pub ports: &'a PortAssignment,
    pub leaves: u64,
}

impl VirtualTree<'_> {
    fn mult(&self) -> u64 {
        self.leaves + 1
    }

    pub fn size(&self, u: usize) -> u64 {
        self.mult() * self.h.size(u) as u64
    }

    pub fn level(&self, u: usize) -> u32 {
        floor_log2(self.size(u))
    }

    /// Artificial light children of `u`.
    pub fn artificial_light(&self, u: usize) -> u64 {
        if self.leaves > 0 && self.h.heavy(u).is_none() {
            self.leaves - 1
        } else {
            self.leaves
        }
    }

    pub fn lw(&self, u: usize) -> u64 {
        self.mult() * self.h.light_weight(u) as u64 + self.artificial_light(u)
    }

    /// Sizes of the light children in port order, artificial ones last.
    pub fn members(&self, u: usize) -> Vec<u64> {
        let real = light_children(self.ports, u);
        let mut out: Vec<u64> = real.iter().map(|&v| self.size(v)).collect();
        out.extend(std::iter::repeat_n(1, self.artificial_light(u) as usize));
        out
    }
}

/// Layout of one node's light region: offsets of its real light children
/// from the ID after the node's own, and the region's total length.
#[derive(Clone, Debug, Default)]
pub(crate) struct NodePlan {
    pub offsets: Vec<BigUint>,
    pub total: BigUint,
}

/// Parameters of the ID assignment.
pub(crate) struct AssignRule<'a> {
    /// Reserve `2·lw(u)` IDs before each node and align its start.
    pub reserve: bool,
    /// Bound base: bounds are `⌊2^{t/base}⌋`.
    pub base: u32,
    /// Reserved segment of a head of the given virtual size.
    pub sl: &'a (dyn Fn(u64) -> BigUint + Sync),
    /// Right-hand side of the per-path total check.
    pub path_rhs: &'a (dyn Fn(u64) -> BigUint + Sync),
    /// Whether a failed path total check is an error.
    pub strict_total: bool,
}

pub(crate) struct Assigned {
    pub start: Vec<BigUint>,
    pub t: Vec<u64>,
    /// Extent used by each head's subtree (zero at non-heads).
    pub span: Vec<BigUint>,
}

/// Assigns starts and bounds path by path, top-down.
pub(crate) fn assign_ids(
    vt: &VirtualTree<'_>,
    plans: &[NodePlan],
    rule: &AssignRule<'_>,
    audit: &mut Audit,
) -> Result<Assigned, SchemeError> {
    let n = vt.t.len();
    let mut base = vec![BigUint::zero(); n];
    let mut start = vec![BigUint::zero(); n];
    let mut texp = vec![0u64; n];
    let mut span = vec![BigUint::zero(); n];
    for head in 0..n {
        if !vt.h.is_head(head) {
            continue;
        }
        let s = std::mem::take(&mut base[head]);
        let path = vt.h.path(head);
        let mut a = s.clone();
        for &u in &path {
            let lw = vt.lw(u);
            if rule.reserve && lw > 0 {
                a += 2 * lw - 1;
                let k = ceil_log2_big(&BigUint::from(lw));
                a = (a >> k) << k;
            }
            start[u] = a.clone();
            a += 1u32;
            let plan = &plans[u];
            for (&v, off) in light_children(vt.ports, u).iter().zip(&plan.offsets) {
                base[v] = &a + off;
            }
            a += &plan.total;
        }
        if vt.leaves > 0 {
            a += 1u32;
        }
        let mut end = a.clone();
        for &u in &path {
            texp[u] = min_exp(&(&a - &start[u]), rule.base);
            let e = &start[u] + pow_floor(texp[u], rule.base);
            if e > end {
                end = e;
            }
        }
        let total = &a - &s;
        let size = vt.size(head);
        if !audit.check(Anchor::PathTotalWithinReserved, head, &total, &(rule.path_rhs)(size))
            && rule.strict_total
        {
            return Err(SchemeError::Invariant { anchor: Anchor::PathTotalWithinReserved, node: head });
        }
        let used = end - &s;
        if !audit.check(Anchor::SpanWithinReserved, head, &used, &(rule.sl)(size)) {
            return Err(SchemeError::Invariant { anchor: Anchor::SpanWithinReserved, node: head });
        }
        span[head] = used;
    }
    Ok(Assigned { start, t: texp, span })
}

/// Offsets and total of a light region made of `(count, length)` runs.
pub(crate) fn uniform_runs(runs: impl Iterator<Item = (u64, BigUint)>, real: usize) -> NodePlan {
    let mut offsets = Vec::with_capacity(real);
    let mut total = BigUint::zero();
    for (count, len) in runs {
        let take = (count as usize).min(real - offsets.len());
        for i in 0..take {
            offsets.push(&total + &len * i);
        }
        total += &len * count;
    }
    NodePlan { offsets, total }
}
