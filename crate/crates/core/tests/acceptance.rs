//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Everything runs inside one test so the timing criterion is not measured
//! while other tests compete for the CPU.

mod common;

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use treelabel::audit::{Anchor, Audit};
use treelabel::codec::{pow_floor, round_pow, round_up, RankDict};
use treelabel::conformance::{corpus, corpus_sizes, run_conformance, Check, Report};
use treelabel::final_scheme::{encode_final, FinalCtx};
use treelabel::scheme::{encode, Decoder, Params, SchemeKind};
use treelabel::tree::{ceil_log2, gen_tree, Tree, TreeKind};

struct Outcome {
    id: u32,
    pass: bool,
    detail: String,
    /// Recorded as unattainable; reported but not enforced.
    waived: bool,
}

fn line(o: &Outcome) -> String {
    let status = if o.pass { "PASS" } else { "FAIL" };
    let waived = if o.waived && !o.pass { " (recorded as unattainable)" } else { "" };
    format!("criterion {} {status}{waived}: {}", o.id, o.detail)
}

// ---- criteria 1, 2, 4, 8: corpus checks ----

fn corpus_reports() -> Vec<(SchemeKind, Report)> {
    let c = corpus(&corpus_sizes());
    SchemeKind::ALL.into_iter().map(|k| (k, run_conformance(k, &c))).collect()
}

fn corpus_criterion(id: u32, reports: &[(SchemeKind, Report)], check: Check, what: &str) -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for (k, r) in reports {
        if !r.errors.is_empty() {
            bad.push(format!("{k}: {}", r.errors[0]));
        }
        if check == Check::DistinctStarts || check == Check::Oracle || k.is_routing() {
            match r.get(*k, check) {
                Some(t) => {
                    checked += t.checked;
                    if !t.pass() {
                        bad.push(format!("{k} at {}", t.at));
                    }
                }
                None => bad.push(format!("{k}: no {check} results")),
            }
        }
    }
    let pass = bad.is_empty();
    let detail = if pass { format!("{what}, {checked} trees x schemes") } else { format!("{what}: {}", bad.join("; ")) };
    Outcome { id, pass, detail, waived: false }
}

const BUDGET_ANCHORS: [Anchor; 5] = [
    Anchor::SpanWithinReserved,
    Anchor::RtWithinFreedBits,
    Anchor::StartTrailingZeros,
    Anchor::ClassBoundaryFactor,
    Anchor::MonotoneCodeLength,
];

fn criterion_4(reports: &[(SchemeKind, Report)]) -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    let mut only_waived = true;
    for (k, r) in reports {
        for a in BUDGET_ANCHORS {
            if let Some(t) = r.get(*k, Check::Anchor(a)) {
                checked += t.checked;
                if !t.pass() {
                    bad.push(format!("{k} {a}: {}/{} failed, worst {} > {}", t.failed, t.checked, t.lhs, t.rhs));
                    only_waived &= common::unattainable(&k.to_string(), Check::Anchor(a));
                }
            }
        }
    }
    for a in [Anchor::SpanWithinReserved, Anchor::StartTrailingZeros, Anchor::ClassBoundaryFactor] {
        if !reports.iter().any(|(k, r)| r.get(*k, Check::Anchor(a)).is_some()) {
            bad.push(format!("{a} never evaluated"));
            only_waived = false;
        }
    }
    let pass = bad.is_empty();
    let detail =
        if pass { format!("{checked} assertions, zero failures") } else { format!("{checked} assertions; {}", bad.join("; ")) };
    Outcome { id: 4, pass, detail, waived: !pass && only_waived }
}

// ---- criterion 3: second-order length ratios ----

const LENGTH_EXPONENTS: [u32; 4] = [10, 14, 18, 20];

fn length_trees(n: usize) -> Vec<(String, Tree)> {
    [TreeKind::RandomAttachment, TreeKind::LowerBound(1), TreeKind::LowerBound(8)]
        .into_iter()
        .map(|k| (k.to_string(), gen_tree(k, n, 7).unwrap()))
        .collect()
}

/// Second-order term the ratio divides by, given `⌈log n⌉` and `⌈log log n⌉`.
fn divisor(k: SchemeKind, l: f64, ll: f64) -> f64 {
    match k {
        SchemeKind::Ancestry => ll,
        SchemeKind::Interm => (l * ll).sqrt(),
        SchemeKind::Final => ll * ll,
        _ => ll * ll * ll,
    }
}

/// Largest ratio over all trees and sizes, recorded on the first green run.
const PINNED: [(SchemeKind, f64); 4] = [
    (SchemeKind::Ancestry, 6.750),
    (SchemeKind::Interm, 20.871),
    (SchemeKind::Final, 19.188),
    (SchemeKind::Ct, 14.438),
];

fn criterion_3() -> Outcome {
    let mut ratios: Vec<(SchemeKind, String, Vec<f64>)> = Vec::new();
    for &e in &LENGTH_EXPONENTS {
        let n = 1usize << e;
        let l = ceil_log2(n as u64) as f64;
        let ll = ceil_log2(l as u64) as f64;
        for (name, t) in length_trees(n) {
            for (k, _) in PINNED {
                let enc = encode(k, &t, Params::default(), false).unwrap();
                let r = (enc.max_label_bits() as f64 - l) / divisor(k, l, ll);
                match ratios.iter_mut().find(|(k2, n2, _)| *k2 == k && *n2 == name) {
                    Some(x) => x.2.push(r),
                    None => ratios.push((k, name.clone(), vec![r])),
                }
            }
        }
    }
    let mut bad = Vec::new();
    let mut summary = Vec::new();
    for (k, pinned) in PINNED {
        let rows: Vec<_> = ratios.iter().filter(|x| x.0 == k).collect();
        let worst = rows.iter().flat_map(|x| x.2.iter().copied()).fold(0.0, f64::max);
        summary.push(format!("{k} max {worst:.3}"));
        if (worst - pinned).abs() > 0.1 * pinned {
            bad.push(format!("{k}: max ratio {worst:.3} drifted from pinned {pinned:.3}"));
        }
        for (_, name, rs) in &rows {
            let shown: Vec<String> = rs.iter().map(|r| format!("{r:.2}")).collect();
            println!("  length {k} {name}: {}", shown.join(" "));
            let ok = match k {
                SchemeKind::Ancestry => rs.iter().all(|&r| r <= 12.0),
                SchemeKind::Interm => rs.iter().all(|&r| r <= 40.0) && rs.windows(2).all(|w| w[1] <= w[0]),
                SchemeKind::Final => rs.iter().all(|&r| r <= 60.0 && r <= 1.25 * rs[0]),
                _ => rs.iter().all(|&r| r <= 1.25 * rs[0]),
            };
            if !ok {
                bad.push(format!("{k} {name}: {}", shown.join(" ")));
            }
        }
    }
    let pass = bad.is_empty();
    let detail = if pass { summary.join(", ") } else { bad.join("; ") };
    Outcome { id: 3, pass, detail, waived: false }
}

// ---- criterion 5: codec oracles ----

fn naive_rank(keys: &[u64], x: u64) -> usize {
    keys.iter().filter(|&&k| k < x).count()
}

/// `⌊2^{t/b}⌋` as the largest `y` with `y^b ≤ 2^t`, by bisection.
fn brute_pow_floor(t: u64, b: u32) -> u64 {
    let target = BigUint::from(1u32) << t;
    let (mut lo, mut hi) = (1u64, 1u64 << (t / b as u64 + 1));
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if BigUint::from(mid).pow(b) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn criterion_5() -> Outcome {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
    let mut bad = Vec::new();

    let mut rank_bad = 0;
    for _ in 0..100_000 {
        let width = rng.gen_range(1..=24u32);
        let len = rng.gen_range(0..48usize);
        let mut keys: Vec<u64> = (0..len).map(|_| rng.gen_range(0..1u64 << width)).collect();
        keys.sort_unstable();
        let x = rng.gen_range(0..(1u64 << width) + 2);
        if RankDict::build(&keys, width).unwrap().rank(x) != naive_rank(&keys, x) {
            rank_bad += 1;
        }
    }
    if rank_bad > 0 {
        bad.push(format!("rank: {rank_bad} mismatches"));
    }

    const X_MAX: u64 = 1_000_000;
    let mut pow_bad = 0;
    for b in 1..=64u32 {
        let mut t = 0u64;
        let mut value = brute_pow_floor(0, b);
        for x in 1..=X_MAX {
            while value < x {
                t += 1;
                value = brute_pow_floor(t, b);
            }
            let got = round_pow(&BigUint::from(x), b).unwrap();
            if got.t != t || pow_floor(got.t, b) != BigUint::from(value) {
                pow_bad += 1;
            }
        }
    }
    if pow_bad > 0 {
        bad.push(format!("round_pow: {pow_bad} mismatches"));
    }

    let mut tp_bad = 0;
    let mut worst = 0.0f64;
    for b in 1..=64u64 {
        let mbits = ceil_log2(b) + 2;
        let xs = (1..=20_000u64)
            .map(BigUint::from)
            .chain((0..2_000).map(|_| BigUint::from(rng.gen::<u128>() >> rng.gen_range(0..127)) + 1u32));
        for x in xs {
            let r = round_up(&x, mbits);
            if r < x || &r * (2 * b) > &x * (2 * b + 1) {
                tp_bad += 1;
            }
            let f = (r.to_string().parse::<f64>().unwrap() / x.to_string().parse::<f64>().unwrap() - 1.0) * 2.0 * b as f64;
            worst = worst.max(f);
        }
    }
    if tp_bad > 0 {
        bad.push(format!("two-parts rounding: {tp_bad} over 1+1/2b"));
    }
    let pass = bad.is_empty();
    let detail = if pass {
        format!("rank 1e5 instances, round_pow x<=1e6 b<=64, two-parts excess at most {worst:.3} of 1/2b")
    } else {
        bad.join("; ")
    };
    Outcome { id: 5, pass, detail, waived: false }
}

// ---- criterion 6: constant-operation decoder ----

/// Recorded bound on primitive steps per constant-time query.
const K_OPS: u32 = 64;

fn criterion_6() -> Outcome {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(6);
    let mut worst_per_size = Vec::new();
    let mut bad = Vec::new();
    for e in [8u32, 11, 14, 17, 20] {
        let n = 1usize << e;
        let mut worst = 0;
        for kind in [TreeKind::RandomAttachment, TreeKind::Star, TreeKind::Caterpillar, TreeKind::LowerBound(8)] {
            let t = gen_tree(kind, n, e as u64).unwrap();
            let enc = encode(SchemeKind::Ct, &t, Params::default(), false).unwrap();
            let d = Decoder::from_encoding(&enc).unwrap();
            let mut queries: Vec<(usize, usize)> = (1..n).map(|w| (t.parent(w).unwrap(), w)).collect();
            for _ in 0..20_000.min(n * n) {
                let w = rng.gen_range(0..n);
                let mut u = w;
                for _ in 0..rng.gen_range(1..=64) {
                    u = t.parent(u).unwrap_or(u);
                }
                queries.push((u, w));
                queries.push((rng.gen_range(0..n), rng.gen_range(0..n)));
            }
            for (u, w) in queries.into_iter().filter(|(u, w)| u != w) {
                let ops = d.ct_ops(u, w).unwrap().unwrap();
                worst = worst.max(ops);
                if ops > K_OPS {
                    bad.push(format!("{kind}/{n} {u}->{w}: {ops} ops"));
                }
            }
        }
        worst_per_size.push(format!("2^{e}:{worst}"));
    }
    bad.truncate(5);
    let pass = bad.is_empty();
    let detail = if pass {
        format!("K_ops = {K_OPS}; worst per size {}", worst_per_size.join(" "))
    } else {
        bad.join("; ")
    };
    Outcome { id: 6, pass, detail, waived: false }
}

// ---- criterion 7: encoder time ----

fn time_final(n: usize) -> Duration {
    let t = gen_tree(TreeKind::RandomAttachment, n, 1).unwrap();
    let ctx = FinalCtx { n };
    (0..2)
        .map(|_| {
            let s = Instant::now();
            encode_final(&t, &ctx, &mut Audit::disabled()).unwrap();
            s.elapsed()
        })
        .min()
        .unwrap()
}

fn criterion_7() -> Outcome {
    let million = time_final(1_000_000);
    let a = time_final(1 << 20);
    let b = time_final(1 << 21);
    let ratio = b.as_secs_f64() / a.as_secs_f64();
    let pass = million <= Duration::from_secs(10) && ratio <= 2.5;
    let detail = format!("n=1e6 in {:.2}s; 2^21/2^20 time ratio {ratio:.2}", million.as_secs_f64());
    Outcome { id: 7, pass, detail, waived: false }
}

#[test]
fn acceptance() {
    let mut outcomes = Vec::new();
    let reports = corpus_reports();
    outcomes.push(corpus_criterion(1, &reports, Check::Oracle, "all ordered pairs agree with the oracle"));
    outcomes.push(corpus_criterion(2, &reports, Check::Canonical, "port assignments canonical"));
    outcomes.push(criterion_3());
    outcomes.push(criterion_4(&reports));
    outcomes.push(criterion_5());
    outcomes.push(criterion_6());
    outcomes.push(criterion_7());
    outcomes.push(corpus_criterion(8, &reports, Check::DistinctStarts, "start values pairwise distinct"));
    outcomes.sort_by_key(|o| o.id);
    for o in &outcomes {
        println!("{}", line(o));
    }
    let enforced: Vec<_> = outcomes.iter().filter(|o| !o.pass && !o.waived).map(|o| o.id).collect();
    assert!(enforced.is_empty(), "failed criteria: {enforced:?}");
}
