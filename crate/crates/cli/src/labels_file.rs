//! Text form of an encode run: one label per line, then the ports.
//!
//! ```text
//! # treelabel labels v1
//! # scheme=final n=3 b=0 c=2
//! 0 len:19 8c1a0
//! ...
//! LOCAL            (local-table schemes only)
//! 0 len:7 a4
//! PORTS
//! 0 1 1            (parent, child, port)
//! ```

use anyhow::{bail, ensure, Context, Result};

use treelabel::codec::Bits;
use treelabel::scheme::{Encoding, Header};
use treelabel::tree::{PortAssignment, Tree};

const MAGIC: &str = "# treelabel labels v1";

pub struct LabelsFile {
    pub header: Header,
    pub labels: Vec<Bits>,
    pub locals: Vec<Bits>,
    /// `(parent, child, port)` per edge.
    pub ports: Vec<(usize, usize, u32)>,
}

fn label_line(out: &mut String, i: usize, b: &Bits) {
    out.push_str(&format!("{i} len:{} {}\n", b.len(), b.to_hex()));
}

pub fn render(e: &Encoding, t: &Tree) -> String {
    let mut out = format!("{MAGIC}\n# {}\n", e.header);
    for (i, b) in e.labels.iter().enumerate() {
        label_line(&mut out, i, b);
    }
    if !e.locals.is_empty() {
        out.push_str("LOCAL\n");
        for (i, b) in e.locals.iter().enumerate() {
            label_line(&mut out, i, b);
        }
    }
    out.push_str("PORTS\n");
    for u in 0..t.len() {
        for &c in e.ports.ordered_children(u) {
            out.push_str(&format!("{u} {c} {}\n", e.ports.port_of(c)));
        }
    }
    out
}

fn parse_label(line: &str, expect: usize) -> Result<Bits> {
    let mut f = line.split_whitespace();
    let id: usize = f.next().context("missing node id")?.parse().context("bad node id")?;
    ensure!(id == expect, "expected node {expect}, found {id}");
    let len = f.next().and_then(|s| s.strip_prefix("len:")).context("missing len:<bits>")?;
    let len: usize = len.parse().context("bad bit length")?;
    let hex = f.next().unwrap_or("");
    ensure!(f.next().is_none(), "trailing fields");
    Ok(Bits::from_hex(hex, len)?)
}

pub fn parse(text: &str) -> Result<LabelsFile> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, l)) if l.trim() == MAGIC => {}
        _ => bail!("not a labels file (missing {MAGIC:?})"),
    }
    let (_, h) = lines.next().context("missing header line")?;
    let header: Header = h.trim().strip_prefix('#').context("missing header line")?.trim().parse()?;
    let mut labels = Vec::new();
    let mut locals = Vec::new();
    let mut ports = Vec::new();
    let mut section = 0;
    for (no, line) in lines {
        let line = line.trim();
        let ctx = || format!("line {}", no + 1);
        match line {
            "LOCAL" if section == 0 => section = 1,
            "PORTS" if section < 2 => section = 2,
            _ => match section {
                0 => labels.push(parse_label(line, labels.len()).with_context(ctx)?),
                1 => locals.push(parse_label(line, locals.len()).with_context(ctx)?),
                _ => {
                    let f: Vec<&str> = line.split_whitespace().collect();
                    ensure!(f.len() == 3, "{}: expected \"u child port\"", ctx());
                    ports.push((f[0].parse()?, f[1].parse()?, f[2].parse()?));
                }
            },
        }
    }
    ensure!(section == 2, "missing PORTS section");
    ensure!(labels.len() == header.n, "{} labels for n = {}", labels.len(), header.n);
    Ok(LabelsFile { header, labels, locals, ports })
}

impl LabelsFile {
    /// The port assignment recorded in the file, checked against `t`.
    pub fn port_assignment(&self, t: &Tree) -> Result<PortAssignment> {
        ensure!(t.len() == self.header.n, "tree has {} nodes, labels are for {}", t.len(), self.header.n);
        let mut by_node: Vec<Vec<(u32, usize)>> = vec![Vec::new(); t.len()];
        for &(u, c, p) in &self.ports {
            ensure!(c < t.len() && t.parent(c) == Some(u), "PORTS lists {u} -> {c}, which is not an edge");
            by_node[u].push((p, c));
        }
        for (u, list) in by_node.iter_mut().enumerate() {
            list.sort_unstable();
            let ok = list.len() == t.degree(u) && list.iter().enumerate().all(|(i, &(p, _))| p as usize == i + 1);
            let mut kids: Vec<usize> = list.iter().map(|&(_, c)| c).collect();
            kids.sort_unstable();
            kids.dedup();
            ensure!(ok && kids.len() == list.len(), "ports of node {u} are not 1..={} over distinct children", t.degree(u));
        }
        Ok(PortAssignment::from_orders(t, |u| by_node[u].iter().map(|&(_, c)| c).collect()))
    }
}
