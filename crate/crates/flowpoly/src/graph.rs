//! Bipartite graphs and the derived graphs built from them: the extension
//! DAG `G(H)`, the almost-degree-whiskered graph `W(H)`, and coronas.
//!
//! Vertex labels are fixed throughout the crate: the left shore is
//! `S = {1, ..., n}` and the right shore is `T = {n+1, ..., n+m}`. All edges
//! of `H` join the two shores and, viewed as a DAG, are directed from `S`
//! to `T`. Neighbor lists are stored sorted ascending; the canonical framing
//! and the clique/matching maps depend on that order.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

/// Errors raised while parsing or validating graphs.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("shore sizes must be positive, got n={n}, m={m}")]
    EmptyShore { n: usize, m: usize },
    #[error("vertex {v} is out of range 1..={max}")]
    VertexOutOfRange { v: usize, max: usize },
    #[error("edge {{{a}, {b}}} joins two vertices of the same shore")]
    NonBipartiteEdge { a: usize, b: usize },
    #[error("duplicate edge {{{i}, {j}}}")]
    DuplicateEdge { i: usize, j: usize },
    #[error("{0}")]
    LowDegree(String),
    #[error("graph is disconnected: vertex {v} is not reachable from vertex 1")]
    Disconnected { v: usize },
    #[error("corona family is missing vertex {0}")]
    MissingFamilyVertex(String),
}

/// A validated simple connected bipartite graph with minimum degree two.
///
/// Shores are `S = {1..n}` and `T = {n+1..n+m}`; edges are stored as pairs
/// `(i, j)` with `i <= n < j`, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    n: usize,
    m: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>, // 1-indexed; adj[0] unused
}

impl BipartiteGraph {
    /// Build and validate a bipartite graph from shore sizes and edge pairs.
    ///
    /// Pairs may list either endpoint first; they are canonicalized to
    /// `(S-vertex, T-vertex)` and sorted. Validation rejects out-of-range
    /// labels, same-shore pairs, duplicates, vertices of degree < 2, and
    /// disconnected graphs.
    pub fn new(n: usize, m: usize, pairs: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n == 0 || m == 0 {
            return Err(GraphError::EmptyShore { n, m });
        }
        let max = n + m;
        let mut edges = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            if a == 0 || a > max {
                return Err(GraphError::VertexOutOfRange { v: a, max });
            }
            if b == 0 || b > max {
                return Err(GraphError::VertexOutOfRange { v: b, max });
            }
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            if lo > n || hi <= n {
                return Err(GraphError::NonBipartiteEdge { a, b });
            }
            edges.push((lo, hi));
        }
        edges.sort_unstable();
        for w in edges.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateEdge {
                    i: w[0].0,
                    j: w[0].1,
                });
            }
        }
        let mut adj = vec![Vec::new(); max + 1];
        for &(i, j) in &edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
        }
        let low: Vec<usize> = (1..=max).filter(|&v| adj[v].len() < 2).collect();
        if !low.is_empty() {
            let msg = low
                .iter()
                .map(|&v| format!("vertex {} has degree {}", v, adj[v].len()))
                .collect::<Vec<_>>()
                .join("; ");
            return Err(GraphError::LowDegree(msg));
        }
        // connectivity via BFS from vertex 1
        let mut seen = vec![false; max + 1];
        let mut queue = VecDeque::from([1usize]);
        seen[1] = true;
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        if let Some(v) = (1..=max).find(|&v| !seen[v]) {
            return Err(GraphError::Disconnected { v });
        }
        Ok(Self { n, m, edges, adj })
    }

    /// Number of left-shore vertices.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of right-shore vertices.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Total number of vertices `n + m`.
    pub fn vertex_count(&self) -> usize {
        self.n + self.m
    }

    /// Edges as `(i, j)` pairs with `i` in `S`, `j` in `T`, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Lexicographic position of edge `(i, j)` among all edges.
    pub fn edge_position(&self, i: usize, j: usize) -> Option<usize> {
        self.edges.binary_search(&(i, j)).ok()
    }

    /// True when `v` lies in the left shore `S = {1..n}`.
    pub fn in_left_shore(&self, v: usize) -> bool {
        (1..=self.n).contains(&v)
    }

    /// True when `v` lies in the right shore `T = {n+1..n+m}`.
    pub fn in_right_shore(&self, v: usize) -> bool {
        v > self.n && v <= self.n + self.m
    }

    /// Neighbors of `v`, sorted ascending.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.edges.binary_search(&(lo, hi)).is_ok()
    }

    /// Whether the whiskered graph `W(H)` has the leaf `w_{v,u}`.
    ///
    /// A left-shore vertex owns one leaf per neighbor except its smallest;
    /// a right-shore vertex owns one per neighbor except its largest. Both
    /// the matching map and the cover actions rely on this single predicate.
    pub fn leaf_exists(&self, v: usize, u: usize) -> bool {
        let nbrs = self.neighbors(v);
        if nbrs.binary_search(&u).is_err() {
            return false;
        }
        if self.in_left_shore(v) {
            u != nbrs[0]
        } else {
            u != *nbrs.last().expect("degree >= 2")
        }
    }

    /// Parse a graph document: either JSON `{"shores":[n,m],"edges":[[i,j],...]}`
    /// or a plain-text edge list whose first line is `n m` followed by one
    /// `i j` pair per line. Blank lines and `#` comments are ignored in text.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            Self::parse_json(trimmed)
        } else {
            Self::parse_text(text)
        }
    }

    fn parse_json(text: &str) -> Result<Self, GraphError> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| GraphError::Malformed(format!("invalid JSON: {e}")))?;
        let shores = value
            .get("shores")
            .and_then(Value::as_array)
            .ok_or_else(|| GraphError::Malformed("missing \"shores\" array".into()))?;
        if shores.len() != 2 {
            return Err(GraphError::Malformed("\"shores\" must be [n, m]".into()));
        }
        let n = shores[0].as_u64().ok_or_else(|| {
            GraphError::Malformed("shore sizes must be nonnegative integers".into())
        })? as usize;
        let m = shores[1].as_u64().ok_or_else(|| {
            GraphError::Malformed("shore sizes must be nonnegative integers".into())
        })? as usize;
        let raw_edges = value
            .get("edges")
            .and_then(Value::as_array)
            .ok_or_else(|| GraphError::Malformed("missing \"edges\" array".into()))?;
        let mut pairs = Vec::with_capacity(raw_edges.len());
        for e in raw_edges {
            let pair = e
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| GraphError::Malformed(format!("edge {e} is not a pair")))?;
            let a = pair[0].as_u64().ok_or_else(|| {
                GraphError::Malformed(format!("edge {e} has a non-integer endpoint"))
            })?;
            let b = pair[1].as_u64().ok_or_else(|| {
                GraphError::Malformed(format!("edge {e} has a non-integer endpoint"))
            })?;
            pairs.push((a as usize, b as usize));
        }
        Self::new(n, m, &pairs)
    }

    fn parse_text(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| GraphError::Malformed("empty document".into()))?;
        let mut parts = header.split_whitespace();
        let n: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| GraphError::Malformed(format!("bad header line {header:?}")))?;
        let m: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| GraphError::Malformed(format!("bad header line {header:?}")))?;
        if parts.next().is_some() {
            return Err(GraphError::Malformed(format!("bad header line {header:?}")));
        }
        let mut pairs = Vec::new();
        for line in lines {
            let mut fields = line.split_whitespace();
            let a: usize = fields
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| GraphError::Malformed(format!("bad edge line {line:?}")))?;
            let b: usize = fields
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| GraphError::Malformed(format!("bad edge line {line:?}")))?;
            if fields.next().is_some() {
                return Err(GraphError::Malformed(format!("bad edge line {line:?}")));
            }
            pairs.push((a, b));
        }
        Self::new(n, m, &pairs)
    }

    /// The underlying simple graph with string labels (vertex `v` is `"v"`).
    pub fn to_simple_graph(&self) -> SimpleGraph {
        let labels: Vec<String> = (1..=self.vertex_count()).map(|v| v.to_string()).collect();
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|&(i, j)| (i - 1, j - 1)).collect();
        SimpleGraph::from_indexed(labels, edges)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "shores": [self.n, self.m],
            "edges": self.edges.iter().map(|&(i, j)| json!([i, j])).collect::<Vec<_>>(),
        })
    }
}

/// An edge of the extension DAG `G(H)`.
///
/// `Alpha { copy, i }` is one of the two parallel edges `s -> i`,
/// `Beta { i, j }` is the edge of `H` from `i` to `j`, and `Gamma { j, copy }`
/// is one of the two parallel edges `j -> t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DagEdge {
    Alpha { copy: u8, i: usize },
    Beta { i: usize, j: usize },
    Gamma { j: usize, copy: u8 },
}

impl fmt::Display for DagEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DagEdge::Alpha { copy, i } => write!(f, "a{copy}_{i}"),
            DagEdge::Beta { i, j } => write!(f, "b_{i}_{j}"),
            DagEdge::Gamma { j, copy } => write!(f, "g_{j}_{copy}"),
        }
    }
}

/// The extension DAG `G(H)`: `H` plus a source `s` with two parallel edges to
/// each left-shore vertex and a sink `t` with two parallel edges from each
/// right-shore vertex.
///
/// Edge coordinates are fixed for the whole crate: all alpha edges ordered by
/// `(i, copy)`, then all beta edges lexicographically by `(i, j)`, then all
/// gamma edges by `(j, copy)`. Vectors indexed by edges use this order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedDag {
    base: BipartiteGraph,
}

impl ExtendedDag {
    /// Construct the extension of a validated bipartite graph.
    pub fn new(base: BipartiteGraph) -> Self {
        Self { base }
    }

    pub fn base(&self) -> &BipartiteGraph {
        &self.base
    }

    /// Total number of edges: `2n + 2m + |E(H)|`.
    pub fn edge_count(&self) -> usize {
        2 * self.base.n + 2 * self.base.m + self.base.edge_count()
    }

    /// Number of inner vertices (the vertices of `H`).
    pub fn inner_vertex_count(&self) -> usize {
        self.base.vertex_count()
    }

    /// Dimension of the flow polytope: `|E(G)| - #inner - 1 = n + m + |E(H)| - 1`.
    pub fn dimension(&self) -> usize {
        self.edge_count() - self.inner_vertex_count() - 1
    }

    /// Coordinate of an edge in the fixed edge order, if the edge exists.
    pub fn edge_index(&self, edge: DagEdge) -> Option<usize> {
        let n = self.base.n;
        match edge {
            DagEdge::Alpha { copy, i } => {
                if !(copy == 1 || copy == 2) || !self.base.in_left_shore(i) {
                    return None;
                }
                Some(2 * (i - 1) + (copy as usize - 1))
            }
            DagEdge::Beta { i, j } => self.base.edge_position(i, j).map(|p| 2 * n + p),
            DagEdge::Gamma { j, copy } => {
                if !(copy == 1 || copy == 2) || !self.base.in_right_shore(j) {
                    return None;
                }
                Some(2 * n + self.base.edge_count() + 2 * (j - n - 1) + (copy as usize - 1))
            }
        }
    }

    /// The edge occupying a coordinate; inverse of [`Self::edge_index`].
    pub fn edge_at(&self, index: usize) -> Option<DagEdge> {
        let n = self.base.n;
        let e = self.base.edge_count();
        if index < 2 * n {
            Some(DagEdge::Alpha {
                copy: (index % 2 + 1) as u8,
                i: index / 2 + 1,
            })
        } else if index < 2 * n + e {
            let (i, j) = self.base.edges()[index - 2 * n];
            Some(DagEdge::Beta { i, j })
        } else if index < self.edge_count() {
            let k = index - 2 * n - e;
            Some(DagEdge::Gamma {
                j: n + k / 2 + 1,
                copy: (k % 2 + 1) as u8,
            })
        } else {
            None
        }
    }

    /// All edges in coordinate order.
    pub fn edge_order(&self) -> Vec<DagEdge> {
        (0..self.edge_count())
            .map(|k| self.edge_at(k).expect("index in range"))
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "shores": [self.base.n, self.base.m],
            "edge_count": self.edge_count(),
            "dimension": self.dimension(),
            "edges": self.edge_order().iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// The almost-degree-whiskered graph `W(H)`: `H` plus `deg(v) - 1` pendant
/// leaves at each vertex `v`.
///
/// Leaves carry the labels from the bijection machinery: a left-shore vertex
/// `i` with neighbors `v_1 < ... < v_k` owns `w_{i,v_2}, ..., w_{i,v_k}`,
/// while a right-shore vertex owns `w_{j,v_1}, ..., w_{j,v_{k-1}}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WhiskeredGraph {
    base: BipartiteGraph,
    leaves: Vec<(usize, usize)>, // (owner v, direction u), sorted
}

impl WhiskeredGraph {
    pub fn base(&self) -> &BipartiteGraph {
        &self.base
    }

    /// Leaves as `(owner, direction)` pairs, sorted; the leaf vertex is `w_{owner,direction}`.
    pub fn leaves(&self) -> &[(usize, usize)] {
        &self.leaves
    }

    pub fn leaf_label(v: usize, u: usize) -> String {
        format!("w_{v}_{u}")
    }

    /// Edge count `|E(H)| + sum_v (deg(v) - 1)`.
    pub fn edge_count(&self) -> usize {
        self.base.edge_count() + self.leaves.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.base.vertex_count() + self.leaves.len()
    }

    /// Expand into a plain labeled simple graph (base vertices keep their
    /// numeric labels; leaves get `w_v_u` labels).
    pub fn to_simple_graph(&self) -> SimpleGraph {
        let nm = self.base.vertex_count();
        let mut labels: Vec<String> = (1..=nm).map(|v| v.to_string()).collect();
        let mut edges: Vec<(usize, usize)> = self
            .base
            .edges()
            .iter()
            .map(|&(i, j)| (i - 1, j - 1))
            .collect();
        for (k, &(v, u)) in self.leaves.iter().enumerate() {
            labels.push(Self::leaf_label(v, u));
            edges.push((v - 1, nm + k));
        }
        SimpleGraph::from_indexed(labels, edges)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "shores": [self.base.n, self.base.m],
            "base_edges": self.base.edges().iter().map(|&(i, j)| json!([i, j])).collect::<Vec<_>>(),
            "leaves": self.leaves.iter().map(|&(v, u)| Self::leaf_label(v, u)).collect::<Vec<_>>(),
        })
    }
}

/// Construct the extension DAG `G(H)`.
pub fn extend(base: &BipartiteGraph) -> ExtendedDag {
    ExtendedDag::new(base.clone())
}

/// Construct the almost-degree-whiskered graph `W(H)` with its leaf labels.
pub fn whisker(base: &BipartiteGraph) -> WhiskeredGraph {
    let mut leaves = Vec::new();
    for v in 1..=base.vertex_count() {
        for &u in base.neighbors(v) {
            if base.leaf_exists(v, u) {
                leaves.push((v, u));
            }
        }
    }
    leaves.sort_unstable();
    WhiskeredGraph {
        base: base.clone(),
        leaves,
    }
}

/// A plain simple graph with string vertex labels; carrier for corona output
/// and matching enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimpleGraph {
    labels: Vec<String>,
    edges: Vec<(usize, usize)>, // index pairs, lo < hi, sorted
}

impl SimpleGraph {
    /// Build from labels and index pairs; duplicate edges and loops are dropped.
    pub fn from_indexed(labels: Vec<String>, pairs: Vec<(usize, usize)>) -> Self {
        let mut edges: Vec<(usize, usize)> = pairs
            .into_iter()
            .filter(|&(a, b)| a != b)
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        Self { labels, edges }
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == v || b == v)
            .count()
    }

    /// Complete graph `K_k` with labels `"1".."k"`.
    pub fn complete(k: usize) -> Self {
        let labels = (1..=k).map(|v| v.to_string()).collect();
        let mut edges = Vec::new();
        for a in 0..k {
            for b in a + 1..k {
                edges.push((a, b));
            }
        }
        Self { labels, edges }
    }

    /// Edgeless graph on `k` vertices.
    pub fn empty(k: usize) -> Self {
        Self {
            labels: (1..=k).map(|v| v.to_string()).collect(),
            edges: Vec::new(),
        }
    }
}

/// The corona of `base` with a family of attachment graphs: every vertex `v`
/// is joined to every vertex of its own fresh copy of `family[v]`.
///
/// Attached vertices get fresh labels `"{v}:{u}"`. The family must assign a
/// graph (possibly on zero vertices) to every vertex of `base`.
pub fn corona(
    base: &SimpleGraph,
    family: &BTreeMap<String, SimpleGraph>,
) -> Result<SimpleGraph, GraphError> {
    for label in base.labels() {
        if !family.contains_key(label) {
            return Err(GraphError::MissingFamilyVertex(label.clone()));
        }
    }
    let mut labels = base.labels().to_vec();
    let mut edges = base.edges().to_vec();
    for (v, label) in base.labels().iter().enumerate() {
        let attach = &family[label];
        let offset = labels.len();
        for u in attach.labels() {
            labels.push(format!("{label}:{u}"));
        }
        for &(a, b) in attach.edges() {
            edges.push((offset + a, offset + b));
        }
        for k in 0..attach.vertex_count() {
            edges.push((v, offset + k));
        }
    }
    Ok(SimpleGraph::from_indexed(labels, edges))
}
