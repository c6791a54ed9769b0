//! Rooted trees, heavy-path decomposition, canonical port numbering and the
//! brute-force first-hop oracle every scheme is checked against.
//!
//! Nodes are numbered `0..n` with `0` the root and every parent numbered
//! below its children, which is also the order of the on-disk format.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use thiserror::Error;

const NONE: usize = usize::MAX;

/// A rooted tree with ordered children, stored as a parent array plus a
/// compressed child list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    parent: Vec<usize>,
    child_off: Vec<usize>,
    child_list: Vec<usize>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("a tree needs at least one node")]
    Empty,
    #[error("malformed node count {0:?}")]
    BadCount(String),
    #[error("expected {expected} parent entries, found {found}")]
    ParentCount { expected: usize, found: usize },
    #[error("malformed parent entry {text:?} for node {node}")]
    BadParent { node: usize, text: String },
    #[error("parent {parent} of node {node} is out of range")]
    ParentOutOfRange { node: usize, parent: usize },
    #[error("parent {parent} of node {node} is not numbered below it")]
    NotTopological { node: usize, parent: usize },
    #[error("unexpected trailing input {0:?}")]
    Trailing(String),
}

impl Tree {
    /// Builds a tree from the parents of nodes `1..n`; `parents.len() == n - 1`.
    pub fn from_parents(n: usize, parents: &[usize]) -> Result<Tree, TreeError> {
        if n == 0 {
            return Err(TreeError::Empty);
        }
        if parents.len() != n - 1 {
            return Err(TreeError::ParentCount { expected: n - 1, found: parents.len() });
        }
        let mut parent = Vec::with_capacity(n);
        parent.push(NONE);
        for (i, &p) in parents.iter().enumerate() {
            let node = i + 1;
            if p >= n {
                return Err(TreeError::ParentOutOfRange { node, parent: p });
            }
            if p >= node {
                return Err(TreeError::NotTopological { node, parent: p });
            }
            parent.push(p);
        }
        let mut child_off = vec![0usize; n + 1];
        for &p in &parent[1..] {
            child_off[p + 1] += 1;
        }
        for i in 0..n {
            child_off[i + 1] += child_off[i];
        }
        let mut fill = child_off.clone();
        let mut child_list = vec![0usize; n - 1];
        for v in 1..n {
            let p = parent[v];
            child_list[fill[p]] = v;
            fill[p] += 1;
        }
        Ok(Tree { parent, child_off, child_list })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn parent(&self, u: usize) -> Option<usize> {
        match self.parent[u] {
            NONE => None,
            p => Some(p),
        }
    }

    /// Children of `u` in input (increasing index) order.
    pub fn children(&self, u: usize) -> &[usize] {
        &self.child_list[self.child_off[u]..self.child_off[u + 1]]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.child_off[u + 1] - self.child_off[u]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.len()).map(|u| self.degree(u)).max().unwrap_or(0)
    }

    /// Number of edges from the root to the deepest node.
    pub fn depth(&self) -> usize {
        let mut d = vec![0usize; self.len()];
        for v in 1..self.len() {
            d[v] = d[self.parent[v]] + 1;
        }
        d.into_iter().max().unwrap_or(0)
    }

    /// Serializes to the two-line parent-array format.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.len());
        if self.len() > 1 {
            let parents: Vec<String> = self.parent[1..].iter().map(|p| p.to_string()).collect();
            s.push_str(&parents.join(" "));
            s.push('\n');
        }
        s
    }
}

/// Parses the tree file format: the node count on the first line, then the
/// parents of nodes `1..n` on the second.
pub fn parse_tree(text: &str) -> Result<Tree, TreeError> {
    let mut lines = text.lines();
    let first = lines.next().ok_or(TreeError::Empty)?.trim();
    let n: usize = first.parse().map_err(|_| TreeError::BadCount(first.to_string()))?;
    if n == 0 {
        return Err(TreeError::Empty);
    }
    let second = lines.next().unwrap_or("");
    let mut parents = Vec::with_capacity(n - 1);
    for (i, tok) in second.split_whitespace().enumerate() {
        let p = tok
            .parse::<usize>()
            .map_err(|_| TreeError::BadParent { node: i + 1, text: tok.to_string() })?;
        parents.push(p);
    }
    if let Some(extra) = lines.find(|l| !l.trim().is_empty()) {
        return Err(TreeError::Trailing(extra.to_string()));
    }
    Tree::from_parents(n, &parents)
}

impl FromStr for Tree {
    type Err = TreeError;
    fn from_str(s: &str) -> Result<Tree, TreeError> {
        parse_tree(s)
    }
}

/// `⌊log₂ x⌋` for `x ≥ 1`.
pub fn floor_log2(x: u64) -> u32 {
    debug_assert!(x > 0);
    63 - x.leading_zeros()
}

/// `⌈log₂ x⌉` for `x ≥ 1`.
pub fn ceil_log2(x: u64) -> u32 {
    debug_assert!(x > 0);
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Heavy-path decomposition with the per-node quantities the encoders use.
#[derive(Clone, Debug)]
pub struct HeavyDecomposition {
    size: Vec<usize>,
    heavy: Vec<usize>,
    head: Vec<usize>,
    level: Vec<u32>,
    light_weight: Vec<usize>,
    light_depth: Vec<u32>,
}

impl HeavyDecomposition {
    pub fn size(&self, u: usize) -> usize {
        self.size[u]
    }

    /// Child with the largest subtree, smallest index on ties.
    pub fn heavy(&self, u: usize) -> Option<usize> {
        match self.heavy[u] {
            NONE => None,
            h => Some(h),
        }
    }

    pub fn head(&self, u: usize) -> usize {
        self.head[u]
    }

    pub fn is_head(&self, u: usize) -> bool {
        self.head[u] == u
    }

    /// `⌊log₂ |T_u|⌋`.
    pub fn level(&self, u: usize) -> u32 {
        self.level[u]
    }

    /// Total size of the subtrees of the light children of `u`.
    pub fn light_weight(&self, u: usize) -> usize {
        self.light_weight[u]
    }

    /// Number of light edges between `u` and the root.
    pub fn light_depth(&self, u: usize) -> u32 {
        self.light_depth[u]
    }

    /// Nodes of the heavy path starting at `head`, top to bottom.
    pub fn path(&self, head: usize) -> Vec<usize> {
        let mut out = vec![head];
        let mut u = head;
        while let Some(h) = self.heavy(u) {
            out.push(h);
            u = h;
        }
        out
    }
}

pub fn decompose(t: &Tree) -> HeavyDecomposition {
    let n = t.len();
    let mut size = vec![1usize; n];
    for v in (1..n).rev() {
        size[t.parent[v]] += size[v];
    }
    let mut heavy = vec![NONE; n];
    let mut light_weight = vec![0usize; n];
    let mut level = vec![0u32; n];
    for u in 0..n {
        let mut best = NONE;
        for &c in t.children(u) {
            if best == NONE || size[c] > size[best] {
                best = c;
            }
        }
        heavy[u] = best;
        if best != NONE {
            light_weight[u] = size[u] - 1 - size[best];
        }
        level[u] = floor_log2(size[u] as u64);
    }
    let mut head = vec![0usize; n];
    let mut light_depth = vec![0u32; n];
    for v in 1..n {
        let p = t.parent[v];
        if heavy[p] == v {
            head[v] = head[p];
            light_depth[v] = light_depth[p];
        } else {
            head[v] = v;
            light_depth[v] = light_depth[p] + 1;
        }
    }
    HeavyDecomposition { size, heavy, head, level, light_weight, light_depth }
}

/// Port numbers of child edges; port 0 is reserved for the parent direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortAssignment {
    child_off: Vec<usize>,
    order: Vec<usize>,
    port_of: Vec<u32>,
}

impl PortAssignment {
    /// Builds an assignment from per-node child orders (port `i+1` goes to `orders[u][i]`).
    pub fn from_orders(t: &Tree, orders: impl Fn(usize) -> Vec<usize>) -> PortAssignment {
        let n = t.len();
        let mut order = Vec::with_capacity(n.saturating_sub(1));
        let mut port_of = vec![0u32; n];
        for u in 0..n {
            let o = orders(u);
            assert_eq!(o.len(), t.degree(u), "port order must cover every child of {u}");
            for (i, &c) in o.iter().enumerate() {
                assert_eq!(t.parent(c), Some(u), "node {c} is not a child of {u}");
                port_of[c] = i as u32 + 1;
                order.push(c);
            }
        }
        PortAssignment { child_off: t.child_off.clone(), order, port_of }
    }

    /// Port of the edge from the parent of `v` to `v`.
    pub fn port_of(&self, v: usize) -> u32 {
        self.port_of[v]
    }

    /// Children of `u` in port order.
    pub fn ordered_children(&self, u: usize) -> &[usize] {
        &self.order[self.child_off[u]..self.child_off[u + 1]]
    }

    pub fn child_at(&self, u: usize, port: u32) -> Option<usize> {
        if port == 0 {
            return None;
        }
        self.ordered_children(u).get(port as usize - 1).copied()
    }

    /// True when every node's ports list its children by non-increasing subtree size.
    pub fn is_canonical(&self, h: &HeavyDecomposition) -> bool {
        (0..self.port_of.len()).all(|u| {
            self.ordered_children(u).windows(2).all(|w| h.size(w[0]) >= h.size(w[1]))
        })
    }
}

/// Children sorted by non-increasing subtree size, smallest index first on
/// ties, so the heavy child is always first.
pub fn canonical_order(t: &Tree, h: &HeavyDecomposition, u: usize) -> Vec<usize> {
    let mut c = t.children(u).to_vec();
    c.sort_by(|&a, &b| h.size(b).cmp(&h.size(a)).then(a.cmp(&b)));
    c
}

pub fn canonical_ports(t: &Tree, h: &HeavyDecomposition) -> PortAssignment {
    PortAssignment::from_orders(t, |u| canonical_order(t, h, u))
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("source and destination are the same node")]
pub struct SameNode;

/// Ground-truth first hop from `u` towards `w`, by walking up from `w`.
pub fn oracle_first_hop(t: &Tree, p: &PortAssignment, u: usize, w: usize) -> Result<u32, SameNode> {
    if u == w {
        return Err(SameNode);
    }
    let mut x = w;
    while let Some(px) = t.parent(x) {
        if px == u {
            return Ok(p.port_of(x));
        }
        x = px;
    }
    Ok(0)
}

/// First hop from `u` to every node at once; entry `u` itself is 0.
pub fn oracle_row(t: &Tree, p: &PortAssignment, u: usize) -> Vec<u32> {
    let mut row = vec![0u32; t.len()];
    let mut stack = Vec::new();
    for &c in t.children(u) {
        let port = p.port_of(c);
        stack.push(c);
        while let Some(x) = stack.pop() {
            row[x] = port;
            stack.extend_from_slice(t.children(x));
        }
    }
    row
}

/// Ground-truth proper ancestry by walking up from `w`.
pub fn is_proper_ancestor(t: &Tree, u: usize, w: usize) -> bool {
    let mut x = w;
    while let Some(px) = t.parent(x) {
        if px == u {
            return true;
        }
        x = px;
    }
    false
}

/// Generator families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TreeKind {
    Path,
    Star,
    Caterpillar,
    CompleteBinary,
    RandomAttachment,
    /// `i` paths of near-equal length below a binary-expanded root, a dummy
    /// leaf on every path node, maximum degree 2.
    LowerBound(usize),
}

impl fmt::Display for TreeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeKind::Path => write!(f, "path"),
            TreeKind::Star => write!(f, "star"),
            TreeKind::Caterpillar => write!(f, "caterpillar"),
            TreeKind::CompleteBinary => write!(f, "complete_binary"),
            TreeKind::RandomAttachment => write!(f, "random"),
            TreeKind::LowerBound(i) => write!(f, "lower_bound:{i}"),
        }
    }
}

impl FromStr for TreeKind {
    type Err = GenError;
    fn from_str(s: &str) -> Result<TreeKind, GenError> {
        let s = s.trim();
        let lb = s
            .strip_prefix("lower_bound:")
            .or_else(|| s.strip_prefix("lower_bound(").and_then(|r| r.strip_suffix(')')));
        if let Some(i) = lb {
            let i: usize = i.parse().map_err(|_| GenError::UnknownKind(s.to_string()))?;
            if i == 0 {
                return Err(GenError::UnknownKind(s.to_string()));
            }
            return Ok(TreeKind::LowerBound(i));
        }
        match s {
            "path" => Ok(TreeKind::Path),
            "star" => Ok(TreeKind::Star),
            "caterpillar" => Ok(TreeKind::Caterpillar),
            "complete_binary" => Ok(TreeKind::CompleteBinary),
            "random" | "random_attachment" => Ok(TreeKind::RandomAttachment),
            _ => Err(GenError::UnknownKind(s.to_string())),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("unknown tree kind {0:?}")]
    UnknownKind(String),
    #[error("{kind} cannot be built with {n} nodes")]
    BadSize { kind: TreeKind, n: usize },
}

/// Deterministic tree generator; `seed` only affects `RandomAttachment`.
pub fn gen_tree(kind: TreeKind, n: usize, seed: u64) -> Result<Tree, GenError> {
    let bad = || GenError::BadSize { kind, n };
    if n == 0 {
        return Err(bad());
    }
    let parents: Vec<usize> = match kind {
        TreeKind::Path => (1..n).map(|v| v - 1).collect(),
        TreeKind::Star => vec![0; n - 1],
        TreeKind::Caterpillar => {
            let spine = n.div_ceil(2);
            (1..n).map(|v| if v < spine { v - 1 } else { v - spine }).collect()
        }
        TreeKind::CompleteBinary => {
            if !(n + 1).is_power_of_two() {
                return Err(bad());
            }
            (1..n).map(|v| (v - 1) / 2).collect()
        }
        TreeKind::RandomAttachment => {
            let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
            (1..n).map(|k| rng.gen_range(0..k)).collect()
        }
        TreeKind::LowerBound(i) => lower_bound_parents(i, n).ok_or_else(bad)?,
    };
    Ok(Tree::from_parents(n, &parents).expect("generators emit topological parent arrays"))
}

fn lower_bound_parents(i: usize, n: usize) -> Option<Vec<usize>> {
    // Heap-shaped skeleton of `s` nodes; free child slots sit at heap
    // indices s..=2s, and path p hangs from the parent of slot s + p.
    let s = if i == 1 { 1 } else { i - 1 };
    if n < s {
        return None;
    }
    let budget = n - s;
    let path_nodes = budget / 2;
    let odd = budget % 2 == 1;
    if i > 1 && path_nodes < i {
        return None;
    }
    let mut parents: Vec<usize> = (1..s).map(|k| (k - 1) / 2).collect();
    let mut next = s;
    for p in 0..i {
        let len = path_nodes / i + usize::from(p < path_nodes % i);
        let mut prev = (s + p - 1) / 2;
        for _ in 0..len {
            let node = next;
            parents.push(prev);
            parents.push(node);
            next += 2;
            prev = node;
        }
        if odd && p == 0 {
            parents.push(prev);
            next += 1;
        }
    }
    debug_assert_eq!(parents.len(), n - 1);
    Some(parents)
}
