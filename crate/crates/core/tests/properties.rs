use num_bigint::BigUint;
use proptest::prelude::*;

use treelabel::codec::{
    decode_monotone, encode_monotone, min_exp, pack_parts, pow_floor, round_up, two_parts_round, two_parts_trunc,
    unpack_parts, Bits, RankDict,
};
use treelabel::scheme::{encode, Decoder, Params, SchemeKind};
use treelabel::tree::{canonical_ports, decompose, floor_log2, oracle_row, parse_tree, Tree};

fn bits_strategy() -> impl Strategy<Value = Bits> {
    prop::collection::vec(any::<bool>(), 0..80).prop_map(|v| {
        let mut b = Bits::new();
        for x in v {
            b.push(x);
        }
        b
    })
}

fn tree_strategy(max: usize) -> impl Strategy<Value = Tree> {
    (1..=max).prop_flat_map(|n| {
        (1..n.max(2)).map(|v| 0..v).collect::<Vec<_>>().prop_map(move |mut p| {
            p.truncate(n - 1);
            Tree::from_parents(n, &p).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn pack_round_trips(parts in prop::collection::vec(bits_strategy(), 0..6)) {
        prop_assert_eq!(unpack_parts(&pack_parts(&parts)).unwrap(), parts);
    }

    #[test]
    fn hex_round_trips(b in bits_strategy()) {
        prop_assert_eq!(Bits::from_hex(&b.to_hex(), b.len()).unwrap(), b);
    }

    #[test]
    fn monotone_round_trips(mut seq in prop::collection::vec(0u64..40, 0..30), extra in 0u64..10) {
        seq.sort_unstable_by(|a, b| b.cmp(a));
        let z = seq.first().copied().unwrap_or(0) + extra;
        let code = encode_monotone(&seq, z).unwrap();
        prop_assert!(code.len() as u64 <= 2 * z.max(seq.len() as u64));
        prop_assert_eq!(decode_monotone(&code, z, seq.len()).unwrap(), seq);
    }

    #[test]
    fn rank_counts_smaller_keys(mut keys in prop::collection::vec(0u64..1 << 12, 0..40), x in 0u64..1 << 13) {
        keys.sort_unstable();
        let d = RankDict::build(&keys, 12).unwrap();
        prop_assert_eq!(d.rank(x), keys.iter().filter(|&&k| k < x).count());
    }

    #[test]
    fn two_parts_bracket_the_value(x in 1u64.., mbits in 2u32..20) {
        let v = BigUint::from(x);
        let up = two_parts_round(&v, mbits);
        let down = two_parts_trunc(&v, mbits);
        prop_assert!(down.value() <= v && v <= up.value());
        prop_assert!(up.m >> mbits == 0 && down.m >> mbits == 0);
        prop_assert_eq!(round_up(&v, mbits), up.value());
    }

    #[test]
    fn trunc_keys_preserve_order(x in 0u64..1 << 40, y in 0u64..1 << 40, mbits in 2u32..12) {
        let kx = two_parts_trunc(&BigUint::from(x), mbits).key(8);
        let ky = two_parts_trunc(&BigUint::from(y), mbits).key(8);
        if x <= y {
            prop_assert!(kx <= ky);
        }
    }

    #[test]
    fn min_exp_is_minimal(x in 1u64..1 << 40, b in 1u32..40) {
        let v = BigUint::from(x);
        let t = min_exp(&v, b);
        prop_assert!(pow_floor(t, b) >= v);
        if t > 0 {
            prop_assert!(pow_floor(t - 1, b) < v);
        }
    }

    #[test]
    fn tree_text_round_trips(t in tree_strategy(60)) {
        prop_assert_eq!(parse_tree(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn heavy_paths_halve_sizes(t in tree_strategy(120)) {
        let h = decompose(&t);
        let n = t.len();
        for u in 0..n {
            let kids: usize = t.children(u).iter().map(|&c| h.size(c)).sum();
            prop_assert_eq!(h.size(u), kids + 1);
            if let Some(p) = t.parent(u) {
                if h.heavy(p) != Some(u) {
                    prop_assert!(2 * h.size(u) <= h.size(p));
                }
            }
            prop_assert!(h.light_depth(u) <= floor_log2(n as u64));
        }
        prop_assert!(canonical_ports(&t, &h).is_canonical(&h));
    }

    #[test]
    fn routing_matches_the_oracle(t in tree_strategy(40), pick in 0usize..9) {
        let kind = SchemeKind::ALL[pick];
        let e = encode(kind, &t, Params::default(), false).unwrap();
        let d = Decoder::from_encoding(&e).unwrap();
        let mut starts = e.starts.clone();
        starts.sort();
        starts.dedup();
        prop_assert_eq!(starts.len(), t.len());
        if kind.is_routing() {
            for u in 0..t.len() {
                let row = oracle_row(&t, &e.ports, u);
                for w in (0..t.len()).filter(|&w| w != u) {
                    prop_assert_eq!(d.query(u, w).unwrap(), row[w]);
                }
            }
        }
    }
}
