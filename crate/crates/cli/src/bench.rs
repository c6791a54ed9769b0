//! Label-length measurements over a grid of schemes, sizes and trees.

use std::collections::BTreeMap;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;

use treelabel::scheme::{encode, Decoder, Params, SchemeKind};
use treelabel::tree::{ceil_log2, gen_tree, TreeKind};

use crate::verify::{verify, Mode};

/// Bump when columns change.
pub const SCHEMA_VERSION: u32 = 1;

pub const COLUMNS: [&str; 10] = [
    "schema_version",
    "scheme",
    "n",
    "kind",
    "seed",
    "max_label_bits",
    "mean_label_bits",
    "encode_ms",
    "verify",
    "second_order_ratio",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchMode {
    Skip,
    Check(Mode),
}

impl FromStr for BenchMode {
    type Err = String;
    fn from_str(s: &str) -> Result<BenchMode, String> {
        if s == "none" {
            Ok(BenchMode::Skip)
        } else {
            s.parse().map(BenchMode::Check)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub scheme: SchemeKind,
    pub n: usize,
    pub kind: TreeKind,
    pub seed: u64,
    pub max_label_bits: usize,
    pub mean_label_bits: f64,
    pub encode_ms: f64,
    pub verify: &'static str,
    pub second_order_ratio: Option<f64>,
}

impl BenchRow {
    pub fn record(&self) -> Vec<String> {
        vec![
            SCHEMA_VERSION.to_string(),
            self.scheme.to_string(),
            self.n.to_string(),
            self.kind.to_string(),
            self.seed.to_string(),
            self.max_label_bits.to_string(),
            format!("{:.3}", self.mean_label_bits),
            format!("{:.3}", self.encode_ms),
            self.verify.to_string(),
            self.second_order_ratio.map(|r| format!("{r:.4}")).unwrap_or_default(),
        ]
    }
}

/// `(max bits − ⌈log n⌉)` over the scheme's second-order term:
/// `⌈log log n⌉` for ancestry and bounded degree, `√(⌈log n⌉·⌈log log n⌉)`
/// for the intermediate scheme, `⌈log log n⌉²` for the final scheme and
/// `⌈log log n⌉³` for the constant-time one.
pub fn second_order_ratio(scheme: SchemeKind, n: usize, max_bits: usize) -> Option<f64> {
    let l = ceil_log2(n.max(2) as u64).max(1) as f64;
    let ll = ceil_log2(l as u64).max(1) as f64;
    let d = match scheme {
        SchemeKind::Ancestry | SchemeKind::Bd => ll,
        SchemeKind::Interm => (l * ll).sqrt(),
        SchemeKind::Final => ll * ll,
        SchemeKind::Ct => ll * ll * ll,
        _ => return None,
    };
    Some((max_bits as f64 - l) / d)
}

pub struct Grid {
    pub schemes: Vec<SchemeKind>,
    pub sizes: Vec<usize>,
    pub kinds: Vec<TreeKind>,
    pub seeds: Vec<u64>,
    pub params: Params,
    pub mode: BenchMode,
}

fn run_one(g: &Grid, scheme: SchemeKind, n: usize, kind: TreeKind, seed: u64) -> Result<BenchRow> {
    let t = gen_tree(kind, n, seed)?;
    let params = Params { b: g.params.b.filter(|_| scheme.takes_b()), c: g.params.c.filter(|_| scheme.takes_c()) };
    let start = Instant::now();
    let e = encode(scheme, &t, params, false).with_context(|| format!("{scheme} on {kind}/{n}"))?;
    let encode_ms = start.elapsed().as_secs_f64() * 1e3;
    let verify = match g.mode {
        BenchMode::Skip => "skipped",
        BenchMode::Check(m) => {
            let d = Decoder::from_encoding(&e)?;
            if verify(&t, &e.ports, &d, m, seed).first.is_none() {
                "pass"
            } else {
                "fail"
            }
        }
    };
    let max_label_bits = e.max_label_bits();
    Ok(BenchRow {
        scheme,
        n,
        kind,
        seed,
        max_label_bits,
        mean_label_bits: e.mean_label_bits(),
        encode_ms,
        verify,
        second_order_ratio: second_order_ratio(scheme, n, max_label_bits),
    })
}

/// Rows in grid order: scheme, then size, then tree kind, then seed.
pub fn run(g: &Grid) -> Result<Vec<BenchRow>> {
    let mut items = Vec::new();
    for &s in &g.schemes {
        for &n in &g.sizes {
            for &k in &g.kinds {
                for &seed in &g.seeds {
                    items.push((s, n, k, seed));
                }
            }
        }
    }
    items.par_iter().map(|&(s, n, k, seed)| run_one(g, s, n, k, seed)).collect()
}

pub fn write_csv<W: std::io::Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

/// Whitespace-separated plot data: per scheme and size, the largest label
/// and ratio over all trees.
pub fn plot_data(rows: &[BenchRow]) -> String {
    let mut agg: BTreeMap<(String, usize), (usize, Option<f64>)> = BTreeMap::new();
    for r in rows {
        let e = agg.entry((r.scheme.to_string(), r.n)).or_insert((0, None));
        e.0 = e.0.max(r.max_label_bits);
        if let Some(x) = r.second_order_ratio {
            e.1 = Some(e.1.map_or(x, |y: f64| y.max(x)));
        }
    }
    let mut out = String::from("# scheme n log2_n max_label_bits second_order_ratio\n");
    for ((s, n), (bits, ratio)) in agg {
        let ratio = ratio.map(|r| format!("{r:.4}")).unwrap_or_else(|| "nan".into());
        out.push_str(&format!("{s} {n} {} {bits} {ratio}\n", ceil_log2(n as u64)));
    }
    out
}
