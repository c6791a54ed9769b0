//! The shared small-instance corpus and the checks every scheme must pass
//! on it: agreement with the brute-force oracle on all ordered pairs,
//! canonical ports, distinct starts, and the encoders' recorded
//! inequalities.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;

use crate::audit::Anchor;
use crate::scheme::{encode, Decoder, Params, SchemeKind};
use crate::tree::{decompose, gen_tree, is_proper_ancestor, oracle_row, Tree, TreeKind};

pub const RANDOM_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
pub const LOWER_BOUND_PATHS: [usize; 3] = [1, 2, 8];

#[derive(Clone, Debug)]
pub struct CorpusItem {
    pub kind: TreeKind,
    pub seed: u64,
    pub tree: Tree,
}

impl CorpusItem {
    pub fn name(&self) -> String {
        match self.kind {
            TreeKind::RandomAttachment => format!("{}#{}/{}", self.kind, self.seed, self.tree.len()),
            _ => format!("{}/{}", self.kind, self.tree.len()),
        }
    }
}

/// Every size from 1 to 64, then 128, 256 and 512.
pub fn corpus_sizes() -> Vec<usize> {
    (1..=64).chain([128, 256, 512]).collect()
}

/// All generator families at the given sizes; shapes that do not exist at
/// a size (complete binary trees off `2^k − 1`, too-small lower-bound
/// trees) are skipped.
pub fn corpus(sizes: &[usize]) -> Vec<CorpusItem> {
    let mut kinds: Vec<(TreeKind, u64)> = vec![
        (TreeKind::Path, 0),
        (TreeKind::Star, 0),
        (TreeKind::Caterpillar, 0),
        (TreeKind::CompleteBinary, 0),
    ];
    kinds.extend(RANDOM_SEEDS.iter().map(|&s| (TreeKind::RandomAttachment, s)));
    kinds.extend(LOWER_BOUND_PATHS.iter().map(|&i| (TreeKind::LowerBound(i), 0)));
    let mut out = Vec::new();
    for &n in sizes {
        for &(kind, seed) in &kinds {
            if let Ok(tree) = gen_tree(kind, n, seed) {
                out.push(CorpusItem { kind, seed, tree });
            }
        }
    }
    out
}

/// What a report line is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Check {
    /// Mismatches against the oracle over all ordered pairs.
    Oracle,
    /// Nodes whose children are not in canonical port order.
    Canonical,
    /// Start values shared with another node.
    DistinctStarts,
    /// Lower-bound trees: maximum number of children, against 2.
    MaxDegree,
    Anchor(Anchor),
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Check::Oracle => f.write_str("oracle-equivalence"),
            Check::Canonical => f.write_str("canonical-ports"),
            Check::DistinctStarts => f.write_str("distinct-starts"),
            Check::MaxDegree => f.write_str("lower-bound-max-degree"),
            Check::Anchor(a) => write!(f, "{a}"),
        }
    }
}

/// All evaluations of one check: counts plus the most telling instance,
/// i.e. the one with the largest `lhs / rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tally {
    pub checked: u64,
    pub failed: u64,
    pub lhs: BigUint,
    pub rhs: BigUint,
    pub at: String,
}

impl Tally {
    fn one(lhs: BigUint, rhs: BigUint, at: String) -> Tally {
        let failed = u64::from(lhs > rhs);
        Tally { checked: 1, failed, lhs, rhs, at }
    }

    fn tighter_than(&self, o: &Tally) -> bool {
        let (a, b) = (&self.lhs * &o.rhs, &o.lhs * &self.rhs);
        a > b || (a == b && self.at < o.at)
    }

    fn merge(mut self, o: Tally) -> Tally {
        self.checked += o.checked;
        self.failed += o.failed;
        if o.tighter_than(&self) {
            self.lhs = o.lhs;
            self.rhs = o.rhs;
            self.at = o.at;
        }
        self
    }

    pub fn pass(&self) -> bool {
        self.failed == 0
    }
}

/// Conformance results keyed by scheme and check.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub entries: BTreeMap<(String, Check), Tally>,
    /// Encode runs that returned an error.
    pub errors: Vec<String>,
}

impl Report {
    fn add(&mut self, scheme: SchemeKind, check: Check, t: Tally) {
        let key = (scheme.to_string(), check);
        let merged = match self.entries.remove(&key) {
            Some(old) => old.merge(t),
            None => t,
        };
        self.entries.insert(key, merged);
    }

    pub fn merge(mut self, o: Report) -> Report {
        for ((s, c), t) in o.entries {
            let key = (s, c);
            let merged = match self.entries.remove(&key) {
                Some(old) => old.merge(t),
                None => t,
            };
            self.entries.insert(key, merged);
        }
        self.errors.extend(o.errors);
        self.errors.sort();
        self
    }

    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.entries.values().all(Tally::pass)
    }

    pub fn get(&self, scheme: SchemeKind, check: Check) -> Option<&Tally> {
        self.entries.get(&(scheme.to_string(), check))
    }

    pub fn failures(&self) -> impl Iterator<Item = (&(String, Check), &Tally)> {
        self.entries.iter().filter(|(_, t)| !t.pass())
    }
}

impl fmt::Display for Report {
    /// One line per check: `ANCHOR status lhs rhs`, then context fields.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ((scheme, check), t) in &self.entries {
            let status = if t.pass() { "PASS" } else { "FAIL" };
            writeln!(
                f,
                "{check} {status} {} {} scheme={scheme} checked={} failed={} at={}",
                t.lhs, t.rhs, t.checked, t.failed, t.at
            )?;
        }
        for e in &self.errors {
            writeln!(f, "encode-error FAIL 1 0 {e}")?;
        }
        Ok(())
    }
}

/// Checks one scheme on one tree.
pub fn check_item(scheme: SchemeKind, item: &CorpusItem) -> Report {
    let mut r = Report::default();
    let t = &item.tree;
    let name = item.name();
    let zero = || BigUint::zero();
    if let TreeKind::LowerBound(_) = item.kind {
        r.add(scheme, Check::MaxDegree, Tally::one(t.max_degree().into(), 2u32.into(), name.clone()));
    }
    let e = match encode(scheme, t, Params::default(), true) {
        Ok(e) => e,
        Err(err) => {
            r.errors.push(format!("scheme={scheme} at={name} {err}"));
            return r;
        }
    };
    for rec in &e.records {
        let at = format!("{name}:{}", rec.node);
        r.add(scheme, Check::Anchor(rec.anchor), Tally::one(rec.lhs.clone(), rec.rhs.clone(), at));
    }
    let h = decompose(t);
    let bad_nodes = if e.ports.is_canonical(&h) { 0u32 } else { 1 };
    r.add(scheme, Check::Canonical, Tally::one(bad_nodes.into(), zero(), name.clone()));
    let mut starts = e.starts.clone();
    starts.sort();
    let dups = starts.windows(2).filter(|w| w[0] == w[1]).count();
    r.add(scheme, Check::DistinctStarts, Tally::one(dups.into(), zero(), name.clone()));

    let mut mismatches = 0u64;
    let mut first: Option<String> = None;
    match Decoder::from_encoding(&e) {
        Ok(d) => {
            for u in 0..t.len() {
                let row = if scheme.is_routing() { oracle_row(t, &e.ports, u) } else { Vec::new() };
                for w in (0..t.len()).filter(|&w| w != u) {
                    let want = if scheme.is_routing() { row[w] } else { is_proper_ancestor(t, u, w) as u32 };
                    let got = d.query(u, w).ok();
                    if got != Some(want) {
                        mismatches += 1;
                        first.get_or_insert_with(|| format!("{name}:{u}->{w} got={got:?} want={want}"));
                    }
                }
            }
        }
        Err(err) => {
            mismatches = 1;
            first = Some(format!("{name}: labels do not decode: {err}"));
        }
    }
    r.add(scheme, Check::Oracle, Tally::one(mismatches.into(), zero(), first.unwrap_or(name)));
    r
}

/// Checks `scheme` on every corpus item, in parallel.
pub fn run_conformance(scheme: SchemeKind, corpus: &[CorpusItem]) -> Report {
    corpus.par_iter().map(|item| check_item(scheme, item)).reduce(Report::default, Report::merge)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_shape() {
        let c = corpus(&[1, 2, 7, 64]);
        assert!(c.iter().any(|i| i.tree.len() == 1));
        assert!(c.iter().any(|i| i.kind == TreeKind::CompleteBinary && i.tree.len() == 7));
        assert!(!c.iter().any(|i| i.kind == TreeKind::CompleteBinary && i.tree.len() == 64));
        assert_eq!(c.iter().filter(|i| i.kind == TreeKind::RandomAttachment && i.tree.len() == 64).count(), 5);
        assert!(c.iter().any(|i| i.kind == TreeKind::LowerBound(8)));
    }

    #[test]
    fn merge_keeps_tightest_instance() {
        let a = Tally::one(3u32.into(), 4u32.into(), "a".into());
        let b = Tally::one(5u32.into(), 6u32.into(), "b".into());
        let m = a.clone().merge(b.clone());
        assert_eq!((m.checked, m.failed, m.at.as_str()), (2, 0, "b"));
        assert_eq!(b.merge(a), m);
    }

    #[test]
    fn small_corpus_passes() {
        let c = corpus(&[1, 2, 3, 15, 33]);
        for k in [SchemeKind::Ancestry, SchemeKind::Bd, SchemeKind::Interm] {
            let r = run_conformance(k, &c);
            assert!(r.passed(), "{k}\n{r}");
            assert!(r.get(k, Check::Oracle).unwrap().checked > 10);
        }
    }

    #[test]
    fn report_lines_parse() {
        let r = run_conformance(SchemeKind::Final, &corpus(&[5]));
        for line in r.to_string().lines() {
            let f: Vec<&str> = line.split_whitespace().collect();
            assert!(matches!(f[1], "PASS" | "FAIL"), "{line}");
            f[2].parse::<BigUint>().unwrap();
            f[3].parse::<BigUint>().unwrap();
        }
    }
}
