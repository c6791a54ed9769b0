//! Routing with local tables: a node keeps its full label in local memory,
//! while the address carried by packets is only its start value.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;

use crate::audit::Audit;
use crate::codec::Bits;
use crate::error::SchemeError;
use crate::interm::{encode_interm, IntermCtx, IntermLabel};
use crate::layout::big_part;
use crate::tree::{ceil_log2, PortAssignment, Tree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LocalVariant {
    /// `b = ⌈log n / log log n⌉`: addresses of `log n + O(log log n)` bits.
    V1,
    /// `b = ⌈log n⌉`: addresses of `log n + O(1)` bits.
    V2,
}

impl LocalVariant {
    pub fn ctx(self, n: usize) -> IntermCtx {
        let l = ceil_log2(n.max(2) as u64).max(1);
        let b = match self {
            LocalVariant::V1 => l.div_ceil(ceil_log2(l as u64).max(1)),
            LocalVariant::V2 => l,
        };
        IntermCtx::new(n, Some(b))
    }
}

impl fmt::Display for LocalVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LocalVariant::V1 => "v1",
            LocalVariant::V2 => "v2",
        })
    }
}

impl FromStr for LocalVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<LocalVariant, String> {
        match s {
            "v1" => Ok(LocalVariant::V1),
            "v2" => Ok(LocalVariant::V2),
            _ => Err(format!("unknown local-table variant {s:?}")),
        }
    }
}

/// What a node holds: its address and its local table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalPair {
    pub address: BigUint,
    pub local: IntermLabel,
}

impl LocalPair {
    pub fn address_bits(&self) -> Bits {
        big_part(&self.address)
    }
}

pub fn encode_local(
    t: &Tree,
    variant: LocalVariant,
    audit: &mut Audit,
) -> Result<(Vec<LocalPair>, PortAssignment), SchemeError> {
    let (labels, ports) = encode_interm(t, &variant.ctx(t.len()), audit)?;
    let pairs = labels.into_iter().map(|l| LocalPair { address: l.start.clone(), local: l }).collect();
    Ok((pairs, ports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interm::IntermDecoder;
    use crate::tree::{gen_tree, oracle_first_hop, TreeKind};

    #[test]
    fn parameters() {
        assert_eq!(LocalVariant::V1.ctx(1 << 16).b, 6);
        assert_eq!(LocalVariant::V1.ctx(1 << 30).b, 6);
        assert_eq!(LocalVariant::V2.ctx(1 << 16).b, 16);
        assert_eq!("v2".parse::<LocalVariant>().unwrap(), LocalVariant::V2);
    }

    #[test]
    fn routes_from_addresses() {
        let t = gen_tree(TreeKind::RandomAttachment, 120, 3).unwrap();
        for v in [LocalVariant::V1, LocalVariant::V2] {
            let (pairs, p) = encode_local(&t, v, &mut Audit::disabled()).unwrap();
            let d = IntermDecoder::new(&v.ctx(120));
            for u in 0..120 {
                let pu = d.prepare(&pairs[u].local).unwrap();
                for w in 0..120 {
                    if u != w {
                        let got = d.route_to_start(&pu, &pairs[w].address);
                        assert_eq!(got, oracle_first_hop(&t, &p, u, w).unwrap());
                    }
                }
            }
        }
    }
}
