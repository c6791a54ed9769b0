//! Checks decoded answers against the brute-force oracle.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

use treelabel::scheme::{Decoder, SchemeKind};
use treelabel::tree::{is_proper_ancestor, oracle_first_hop, oracle_row, PortAssignment, Tree};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Sample(usize),
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Mode, String> {
        if s == "exhaustive" {
            return Ok(Mode::Exhaustive);
        }
        s.strip_prefix("sample:")
            .and_then(|k| k.parse().ok())
            .map(Mode::Sample)
            .ok_or_else(|| format!("mode must be exhaustive or sample:<k>, got {s:?}"))
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exhaustive => f.write_str("exhaustive"),
            Mode::Sample(k) => write!(f, "sample:{k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub u: usize,
    pub w: usize,
    pub got: Result<u32, String>,
    pub want: u32,
}

pub struct Outcome {
    pub pairs: u64,
    /// The mismatch with the smallest `(u, w)`.
    pub first: Option<Mismatch>,
}

fn expected(kind: SchemeKind, t: &Tree, ports: &PortAssignment, u: usize, w: usize) -> u32 {
    if kind.is_routing() {
        oracle_first_hop(t, ports, u, w).unwrap_or(0)
    } else {
        is_proper_ancestor(t, u, w) as u32
    }
}

fn compare(d: &Decoder, u: usize, w: usize, want: u32) -> Option<Mismatch> {
    let got = d.query(u, w).map_err(|e| e.to_string());
    (got.as_ref() != Ok(&want)).then_some(Mismatch { u, w, got, want })
}

/// Seeded distinct-endpoint pairs.
pub fn sample_pairs(n: usize, k: usize, seed: u64) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    (0..k)
        .map(|_| {
            let u = rng.gen_range(0..n);
            let w = (u + rng.gen_range(1..n)) % n;
            (u, w)
        })
        .collect()
}

pub fn verify(t: &Tree, ports: &PortAssignment, d: &Decoder, mode: Mode, seed: u64) -> Outcome {
    let kind = d.header().kind;
    let n = t.len();
    let min = |a: Option<Mismatch>, b: Option<Mismatch>| match (a, b) {
        (Some(x), Some(y)) => Some(if (x.u, x.w) <= (y.u, y.w) { x } else { y }),
        (x, y) => x.or(y),
    };
    match mode {
        Mode::Exhaustive => {
            let first = (0..n)
                .into_par_iter()
                .map(|u| {
                    let row = oracle_row(t, ports, u);
                    (0..n).filter(|&w| w != u).find_map(|w| {
                        let want = if kind.is_routing() { row[w] } else { u32::from(row[w] != 0) };
                        compare(d, u, w, want)
                    })
                })
                .reduce(|| None, min);
            Outcome { pairs: (n * n.saturating_sub(1)) as u64, first }
        }
        Mode::Sample(k) => {
            let pairs = sample_pairs(n, k, seed);
            let first = pairs
                .par_iter()
                .map(|&(u, w)| compare(d, u, w, expected(kind, t, ports, u, w)))
                .reduce(|| None, min);
            Outcome { pairs: pairs.len() as u64, first }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use treelabel::scheme::{encode, Params};
    use treelabel::tree::{gen_tree, TreeKind};

    #[test]
    fn modes_parse() {
        assert_eq!("sample:12".parse::<Mode>().unwrap(), Mode::Sample(12));
        assert_eq!("exhaustive".parse::<Mode>().unwrap(), Mode::Exhaustive);
        assert!("sample:x".parse::<Mode>().is_err());
    }

    #[test]
    fn swapped_labels_are_caught() {
        let t = gen_tree(TreeKind::RandomAttachment, 40, 2).unwrap();
        let mut e = encode(SchemeKind::Interm, &t, Params::default(), false).unwrap();
        let ok = Decoder::from_encoding(&e).unwrap();
        assert!(verify(&t, &e.ports, &ok, Mode::Exhaustive, 0).first.is_none());
        e.labels.swap(3, 9);
        let bad = Decoder::from_encoding(&e).unwrap();
        let m = verify(&t, &e.ports, &bad, Mode::Exhaustive, 0).first.unwrap();
        assert!([3, 9].contains(&m.u) || [3, 9].contains(&m.w));
        assert!(verify(&t, &e.ports, &bad, Mode::Sample(5000), 1).first.is_some());
    }

    #[test]
    fn sampling_is_seeded() {
        assert_eq!(sample_pairs(10, 20, 3), sample_pairs(10, 20, 3));
        assert!(sample_pairs(10, 200, 3).iter().all(|(u, w)| u != w && *u < 10 && *w < 10));
        assert!(sample_pairs(1, 5, 0).is_empty());
    }
}
