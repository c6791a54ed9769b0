//! One entry point over every scheme: encode a tree to packed labels, and
//! answer queries from packed labels alone.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;

use crate::ancestry::{encode_ancestry, is_ancestor, AncestryLabel};
use crate::audit::{AssertionRecord, Audit};
use crate::bd::{encode_bd, route_bd, BdCtx, BdLabel};
use crate::codec::Bits;
use crate::consttime::{encode_ct, CtCtx, CtDecoder, CtLabel, CtPrepared};
use crate::error::SchemeError;
use crate::final_scheme::{self, encode_final, FinalCtx, FinalDecoder, FinalLabel, FinalPrepared};
use crate::interm::{encode_bounded_depth, encode_interm, IntermCtx, IntermDecoder, IntermLabel, IntermPrepared};
use crate::local::{encode_local, LocalVariant};
use crate::prelim::{encode_prelim, route_prelim, PrelimCtx, PrelimLabel};
use crate::tree::{canonical_ports, ceil_log2, decompose, PortAssignment, Tree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Ancestry,
    Bd,
    Prelim,
    Interm,
    Final,
    Ct,
    Local(LocalVariant),
    Depth,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 9] = [
        SchemeKind::Ancestry,
        SchemeKind::Bd,
        SchemeKind::Prelim,
        SchemeKind::Interm,
        SchemeKind::Final,
        SchemeKind::Ct,
        SchemeKind::Local(LocalVariant::V1),
        SchemeKind::Local(LocalVariant::V2),
        SchemeKind::Depth,
    ];

    /// False only for the ancestry scheme, whose queries answer 1 or 0.
    pub fn is_routing(self) -> bool {
        self != SchemeKind::Ancestry
    }

    pub fn takes_b(self) -> bool {
        matches!(self, SchemeKind::Ancestry | SchemeKind::Bd | SchemeKind::Prelim | SchemeKind::Interm)
    }

    pub fn takes_c(self) -> bool {
        self == SchemeKind::Prelim
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeKind::Ancestry => f.write_str("ancestry"),
            SchemeKind::Bd => f.write_str("bd"),
            SchemeKind::Prelim => f.write_str("prelim"),
            SchemeKind::Interm => f.write_str("interm"),
            SchemeKind::Final => f.write_str("final"),
            SchemeKind::Ct => f.write_str("ct"),
            SchemeKind::Local(v) => write!(f, "local:{v}"),
            SchemeKind::Depth => f.write_str("depth"),
        }
    }
}

impl FromStr for SchemeKind {
    type Err = SchemeError;
    fn from_str(s: &str) -> Result<SchemeKind, SchemeError> {
        if let Some(v) = s.strip_prefix("local:") {
            return v.parse().map(SchemeKind::Local).map_err(SchemeError::BadParam);
        }
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| SchemeError::BadParam(format!("unknown scheme {s:?}")))
    }
}

/// Optional overrides of a scheme's tuning parameters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Params {
    pub b: Option<u32>,
    pub c: Option<u32>,
}

/// Everything a decoder needs besides the labels themselves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub kind: SchemeKind,
    pub n: usize,
    pub b: u32,
    pub c: u32,
}

impl Header {
    /// Effective parameters of `kind` on `n` nodes.
    pub fn resolve(kind: SchemeKind, n: usize, params: Params) -> Result<Header, SchemeError> {
        if params.b.is_some() && !kind.takes_b() {
            return Err(SchemeError::BadParam(format!("{kind} takes no b")));
        }
        if params.c.is_some() && !kind.takes_c() {
            return Err(SchemeError::BadParam(format!("{kind} takes no c")));
        }
        if params.b == Some(0) || params.c == Some(0) {
            return Err(SchemeError::BadParam("b and c must be positive".into()));
        }
        let logn = ceil_log2(n.max(2) as u64).max(1);
        let (b, c) = match kind {
            SchemeKind::Ancestry | SchemeKind::Bd => (params.b.unwrap_or(logn), 0),
            SchemeKind::Prelim => {
                let d = PrelimCtx::with_defaults(n);
                (params.b.unwrap_or(d.b), params.c.unwrap_or(d.c))
            }
            SchemeKind::Interm => (IntermCtx::new(n, params.b).b, 0),
            SchemeKind::Final => (0, final_scheme::GROWTH_C),
            SchemeKind::Ct => (0, crate::consttime::GROWTH_C),
            SchemeKind::Local(v) => (v.ctx(n).b, 0),
            SchemeKind::Depth => (1, 0),
        };
        Ok(Header { kind, n, b, c })
    }

    fn interm_ctx(&self) -> IntermCtx {
        IntermCtx::unclamped(self.n, self.b)
    }
}

impl fmt::Display for Header {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "scheme={} n={} b={} c={}", self.kind, self.n, self.b, self.c)
    }
}

impl FromStr for Header {
    type Err = SchemeError;
    fn from_str(s: &str) -> Result<Header, SchemeError> {
        let bad = || SchemeError::BadParam(format!("bad header {s:?}"));
        let mut fields = s.split_whitespace().map(|f| f.split_once('=').ok_or_else(bad));
        let mut next = |key: &str| -> Result<&str, SchemeError> {
            match fields.next() {
                Some(Ok((k, v))) if k == key => Ok(v),
                _ => Err(bad()),
            }
        };
        let kind = next("scheme")?.parse()?;
        let n = next("n")?.parse().map_err(|_| bad())?;
        let b = next("b")?.parse().map_err(|_| bad())?;
        let c = next("c")?.parse().map_err(|_| bad())?;
        if fields.next().is_some() {
            return Err(bad());
        }
        Ok(Header { kind, n, b, c })
    }
}

/// Result of one encode run.
#[derive(Clone, Debug)]
pub struct Encoding {
    pub header: Header,
    /// The label of each node; for local-table schemes, its address.
    pub labels: Vec<Bits>,
    /// Local tables, only for local-table schemes.
    pub locals: Vec<Bits>,
    pub starts: Vec<BigUint>,
    pub ports: PortAssignment,
    pub records: Vec<AssertionRecord>,
}

impl Encoding {
    pub fn max_label_bits(&self) -> usize {
        self.labels.iter().map(Bits::len).max().unwrap_or(0)
    }

    pub fn mean_label_bits(&self) -> f64 {
        if self.labels.is_empty() {
            return 0.0;
        }
        self.labels.iter().map(Bits::len).sum::<usize>() as f64 / self.labels.len() as f64
    }
}

/// Encodes `t`; with `audit`, every evaluated inequality is recorded.
pub fn encode(kind: SchemeKind, t: &Tree, params: Params, audit: bool) -> Result<Encoding, SchemeError> {
    let header = Header::resolve(kind, t.len(), params)?;
    let mut a = Audit::new(audit);
    let n = t.len();
    let mut locals = Vec::new();
    let (labels, starts, ports): (Vec<Bits>, Vec<BigUint>, PortAssignment) = match kind {
        SchemeKind::Ancestry => {
            let l = encode_ancestry(t, header.b, &mut a)?;
            let ports = canonical_ports(t, &decompose(t));
            (l.iter().map(AncestryLabel::to_bits).collect(), l.into_iter().map(|x| x.start).collect(), ports)
        }
        SchemeKind::Bd => {
            let ctx = BdCtx { b: header.b, n };
            let (l, p) = encode_bd(t, &ctx, &mut a)?;
            (l.iter().map(|x| x.to_bits(&ctx)).collect(), l.into_iter().map(|x| x.start).collect(), p)
        }
        SchemeKind::Prelim => {
            let ctx = PrelimCtx { b: header.b, c: header.c, n };
            let (l, p) = encode_prelim(t, &ctx, &mut a)?;
            (l.iter().map(|x| x.to_bits(&ctx)).collect(), l.into_iter().map(|x| x.start).collect(), p)
        }
        SchemeKind::Interm | SchemeKind::Depth => {
            let (l, p) = if kind == SchemeKind::Depth {
                encode_bounded_depth(t, &mut a)?
            } else {
                encode_interm(t, &header.interm_ctx(), &mut a)?
            };
            (l.iter().map(IntermLabel::to_bits).collect(), l.into_iter().map(|x| x.start).collect(), p)
        }
        SchemeKind::Final => {
            let (l, p) = encode_final(t, &FinalCtx { n }, &mut a)?;
            (l.iter().map(FinalLabel::to_bits).collect(), l.iter().map(FinalLabel::start).collect(), p)
        }
        SchemeKind::Ct => {
            let ctx = CtCtx::new(n);
            let (l, p) = encode_ct(t, &ctx, &mut a)?;
            let bits = l.iter().map(|x| x.to_bits(&ctx)).collect::<Result<_, _>>()?;
            (bits, l.iter().map(CtLabel::start).collect(), p)
        }
        SchemeKind::Local(v) => {
            let (pairs, p) = encode_local(t, v, &mut a)?;
            locals = pairs.iter().map(|x| x.local.to_bits()).collect();
            (pairs.iter().map(|x| x.address_bits()).collect(), pairs.into_iter().map(|x| x.address).collect(), p)
        }
    };
    Ok(Encoding { header, labels, locals, starts, ports, records: a.into_records() })
}

/// Applies `f` to every label, naming the node on failure.
fn each<T>(labels: &[Bits], f: impl Fn(&Bits) -> Result<T, SchemeError>) -> Result<Vec<T>, SchemeError> {
    each_item(labels, f)
}

fn each_item<S, T>(items: &[S], f: impl Fn(&S) -> Result<T, SchemeError>) -> Result<Vec<T>, SchemeError> {
    items
        .iter()
        .enumerate()
        .map(|(i, x)| f(x).map_err(|e| SchemeError::Malformed(format!("label of node {i}: {e}"))))
        .collect()
}

enum Tables {
    Ancestry(Vec<AncestryLabel>),
    Bd(BdCtx, Vec<BdLabel>),
    Prelim(PrelimCtx, Vec<PrelimLabel>),
    Interm(IntermDecoder, Vec<IntermPrepared>),
    Local(IntermDecoder, Vec<IntermPrepared>, Vec<BigUint>),
    Final(FinalDecoder, Vec<FinalPrepared>),
    Ct(CtDecoder, Vec<CtPrepared>, Vec<BigUint>),
}

/// Answers queries from packed labels, with every table decoded up front.
pub struct Decoder {
    header: Header,
    tables: Tables,
}

impl Decoder {
    /// `locals` is read only by local-table schemes.
    pub fn new(header: Header, labels: &[Bits], locals: &[Bits]) -> Result<Decoder, SchemeError> {
        if labels.len() != header.n {
            return Err(SchemeError::Malformed(format!("{} labels for {} nodes", labels.len(), header.n)));
        }
        let tables = match header.kind {
            SchemeKind::Ancestry => Tables::Ancestry(each(labels, AncestryLabel::from_bits)?),
            SchemeKind::Bd => {
                let ctx = BdCtx { b: header.b, n: header.n };
                Tables::Bd(ctx, each(labels, |l| BdLabel::from_bits(l, &ctx))?)
            }
            SchemeKind::Prelim => {
                let ctx = PrelimCtx { b: header.b, c: header.c, n: header.n };
                Tables::Prelim(ctx, each(labels, |l| PrelimLabel::from_bits(l, &ctx))?)
            }
            SchemeKind::Interm | SchemeKind::Depth => {
                let d = IntermDecoder::new(&header.interm_ctx());
                let p = each(labels, |l| d.prepare(&IntermLabel::from_bits(l)?))?;
                Tables::Interm(d, p)
            }
            SchemeKind::Local(_) => {
                if locals.len() != header.n {
                    return Err(SchemeError::Malformed(format!("{} local tables for {} nodes", locals.len(), header.n)));
                }
                let d = IntermDecoder::new(&header.interm_ctx());
                let p = each(locals, |l| d.prepare(&IntermLabel::from_bits(l)?))?;
                let addresses = labels.iter().map(Bits::to_big).collect();
                Tables::Local(d, p, addresses)
            }
            SchemeKind::Final => {
                let d = FinalDecoder::new(&FinalCtx { n: header.n });
                let p = each(labels, |l| d.prepare(&FinalLabel::from_bits(l)?))?;
                Tables::Final(d, p)
            }
            SchemeKind::Ct => {
                let ctx = CtCtx::new(header.n);
                let d = CtDecoder::new(&ctx);
                let parsed = each(labels, |l| CtLabel::from_bits(l, &ctx))?;
                let p = each_item(&parsed, |l| d.prepare(l))?;
                Tables::Ct(d, p, parsed.iter().map(CtLabel::start).collect())
            }
        };
        Ok(Decoder { header, tables })
    }

    pub fn from_encoding(e: &Encoding) -> Result<Decoder, SchemeError> {
        Decoder::new(e.header, &e.labels, &e.locals)
    }

    pub fn header(&self) -> &Header {
        &self.header
    }

    pub fn len(&self) -> usize {
        self.header.n
    }

    pub fn is_empty(&self) -> bool {
        self.header.n == 0
    }

    fn check(&self, u: usize, w: usize) -> Result<(), SchemeError> {
        if u >= self.len() || w >= self.len() {
            return Err(SchemeError::BadParam(format!("node out of range: {u}, {w} (n = {})", self.len())));
        }
        if u == w {
            return Err(SchemeError::BadParam("query between a node and itself".into()));
        }
        Ok(())
    }

    /// First-hop port from `u` towards `w`; for ancestry, 1 when `u` is a
    /// proper ancestor of `w` and 0 otherwise.
    pub fn query(&self, u: usize, w: usize) -> Result<u32, SchemeError> {
        self.check(u, w)?;
        Ok(match &self.tables {
            Tables::Ancestry(l) => is_ancestor(self.header.b, &l[u], &l[w]) as u32,
            Tables::Bd(ctx, l) => route_bd(ctx, &l[u], &l[w]),
            Tables::Prelim(ctx, l) => route_prelim(ctx, &l[u], &l[w]),
            Tables::Interm(d, p) => d.route_prepared(&p[u], &p[w]),
            Tables::Local(d, p, a) => d.route_to_start(&p[u], &a[w]),
            Tables::Final(d, p) => d.route_prepared(&p[u], &p[w]),
            Tables::Ct(d, p, s) => d.route_counted(&p[u], &s[w]).port,
        })
    }

    /// Primitive steps the constant-time decoder spends on a query.
    pub fn ct_ops(&self, u: usize, w: usize) -> Result<Option<u32>, SchemeError> {
        self.check(u, w)?;
        Ok(match &self.tables {
            Tables::Ct(d, p, s) => Some(d.route_counted(&p[u], &s[w]).ops),
            _ => None,
        })
    }
}
