//! Matchings of the whiskered graph `W(H)`, the matching polynomial, and the
//! matching map `psi` with its inverse.
//!
//! `psi` reads a clique vector entry by entry: a vertex whose choice is not
//! reciprocated contributes its leaf edge when that leaf exists, while a
//! mutually selecting edge contributes either the base edge (minus) or the
//! two leaf edges (plus), again skipping absent leaves.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use serde_json::{json, Value};
use thiserror::Error;

use crate::cliques::{CliqueError, CliqueVector, Sign};
use crate::graph::{BipartiteGraph, SimpleGraph, WhiskeredGraph};
use crate::poly::Polynomial;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatchingError {
    #[error("edge {0} is not an edge of W(H)")]
    EdgeNotInGraph(String),
    #[error("edges {0} and {1} both cover vertex {2}")]
    SharedVertex(String, String, usize),
    #[error(transparent)]
    InvalidVector(#[from] CliqueError),
    #[error("matching map round trip failed: {0}")]
    RoundTrip(String),
}

/// An edge of `W(H)`: either a base edge of `H` or a pendant edge from a
/// base vertex `v` to its leaf `w_{v,u}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WEdge {
    Base { i: usize, j: usize },
    Leaf { v: usize, u: usize },
}

impl WEdge {
    /// Token form: base edges concatenate their endpoint labels (`"14"`),
    /// leaf edges append the base vertex to the leaf name (`"w_2_5-2"`).
    pub fn token(&self) -> String {
        match *self {
            WEdge::Base { i, j } => format!("{i}{j}"),
            WEdge::Leaf { v, u } => format!("w_{v}_{u}-{v}"),
        }
    }

    /// Base vertices of `H` covered by this edge.
    pub fn covered(&self) -> Vec<usize> {
        match *self {
            WEdge::Base { i, j } => vec![i, j],
            WEdge::Leaf { v, .. } => vec![v],
        }
    }
}

impl fmt::Display for WEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

/// A set of edges of `W(H)` with no shared endpoints, kept in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Matching {
    edges: BTreeSet<WEdge>,
}

impl Matching {
    pub fn new(edges: impl IntoIterator<Item = WEdge>) -> Self {
        Self {
            edges: edges.into_iter().collect(),
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn edges(&self) -> impl Iterator<Item = &WEdge> {
        self.edges.iter()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: &WEdge) -> bool {
        self.edges.contains(e)
    }

    /// Whether base vertex `v` is covered by some edge.
    pub fn covers(&self, v: usize) -> bool {
        self.edges.iter().any(|e| e.covered().contains(&v))
    }

    /// Check membership of every edge in `W(H)` and disjointness.
    pub fn validate(&self, w: &WhiskeredGraph) -> Result<(), MatchingError> {
        let h = w.base();
        for e in &self.edges {
            let ok = match *e {
                WEdge::Base { i, j } => h.has_edge(i, j),
                WEdge::Leaf { v, u } => h.leaf_exists(v, u),
            };
            if !ok {
                return Err(MatchingError::EdgeNotInGraph(e.token()));
            }
        }
        let mut seen: Vec<Option<&WEdge>> = vec![None; h.vertex_count() + 1];
        for e in &self.edges {
            for v in e.covered() {
                if let Some(other) = seen[v] {
                    return Err(MatchingError::SharedVertex(other.token(), e.token(), v));
                }
                seen[v] = Some(e);
            }
        }
        Ok(())
    }

    /// Array of edge tokens.
    pub fn to_json(&self) -> Value {
        json!(self.edges.iter().map(WEdge::token).collect::<Vec<_>>())
    }
}

/// Every matching of `W(H)` exactly once (the empty matching included),
/// enumerated by backtracking over the fixed edge order: base edges
/// lexicographically, then leaf edges.
pub fn enumerate_matchings(w: &WhiskeredGraph) -> Vec<Matching> {
    let edges = w_edges(w);
    let mut out = Vec::new();
    let mut chosen: Vec<WEdge> = Vec::new();
    let mut used = vec![false; w.base().vertex_count() + 1];
    backtrack(&edges, 0, &mut chosen, &mut used, &mut |m| {
        out.push(Matching::new(m.iter().copied()))
    });
    out
}

/// The unsigned matching polynomial of `W(H)`: coefficient `k` counts the
/// `k`-edge matchings.
pub fn matching_polynomial(w: &WhiskeredGraph) -> Polynomial {
    let edges = w_edges(w);
    let mut counts: Vec<BigInt> = vec![BigInt::ZERO; edges.len() + 1];
    let mut chosen: Vec<WEdge> = Vec::new();
    let mut used = vec![false; w.base().vertex_count() + 1];
    backtrack(&edges, 0, &mut chosen, &mut used, &mut |m| {
        counts[m.len()] += 1
    });
    Polynomial::new(counts)
}

/// Matching polynomial of an arbitrary simple graph, by the same backtracking.
pub fn matching_polynomial_simple(g: &SimpleGraph) -> Polynomial {
    let mut counts: Vec<BigInt> = vec![BigInt::ZERO; g.edge_count() + 1];
    let mut used = vec![false; g.vertex_count()];
    fn recurse(
        edges: &[(usize, usize)],
        k: usize,
        size: usize,
        used: &mut Vec<bool>,
        counts: &mut Vec<BigInt>,
    ) {
        if k == edges.len() {
            counts[size] += 1;
            return;
        }
        recurse(edges, k + 1, size, used, counts);
        let (a, b) = edges[k];
        if !used[a] && !used[b] {
            used[a] = true;
            used[b] = true;
            recurse(edges, k + 1, size + 1, used, counts);
            used[a] = false;
            used[b] = false;
        }
    }
    recurse(g.edges(), 0, 0, &mut used, &mut counts);
    Polynomial::new(counts)
}

fn w_edges(w: &WhiskeredGraph) -> Vec<WEdge> {
    let mut edges: Vec<WEdge> = w
        .base()
        .edges()
        .iter()
        .map(|&(i, j)| WEdge::Base { i, j })
        .collect();
    edges.extend(w.leaves().iter().map(|&(v, u)| WEdge::Leaf { v, u }));
    edges
}

fn backtrack(
    edges: &[WEdge],
    k: usize,
    chosen: &mut Vec<WEdge>,
    used: &mut Vec<bool>,
    emit: &mut impl FnMut(&[WEdge]),
) {
    if k == edges.len() {
        emit(chosen);
        return;
    }
    backtrack(edges, k + 1, chosen, used, emit);
    let covered = edges[k].covered();
    if covered.iter().all(|&v| !used[v]) {
        for &v in &covered {
            used[v] = true;
        }
        chosen.push(edges[k]);
        backtrack(edges, k + 1, chosen, used, emit);
        chosen.pop();
        for &v in &covered {
            used[v] = false;
        }
    }
}

/// The matching map: read the matching of `W(H)` off a clique vector.
pub fn psi(h: &BipartiteGraph, a: &CliqueVector) -> Result<Matching, CliqueError> {
    a.validate(h)?;
    let mut edges = Vec::new();
    for i in 1..=h.n() {
        let j = a.choice(i);
        if a.choice(j) != i && h.leaf_exists(i, j) {
            edges.push(WEdge::Leaf { v: i, u: j });
        }
    }
    for j in h.n() + 1..=h.vertex_count() {
        let i = a.choice(j);
        if a.choice(i) != j && h.leaf_exists(j, i) {
            edges.push(WEdge::Leaf { v: j, u: i });
        }
    }
    for (pos, &(i, j)) in h.edges().iter().enumerate() {
        if a.choice(i) == j && a.choice(j) == i {
            match a.signs()[pos] {
                Sign::Minus => edges.push(WEdge::Base { i, j }),
                Sign::Plus => {
                    if h.leaf_exists(i, j) {
                        edges.push(WEdge::Leaf { v: i, u: j });
                    }
                    if h.leaf_exists(j, i) {
                        edges.push(WEdge::Leaf { v: j, u: i });
                    }
                }
            }
        }
    }
    Ok(Matching::new(edges))
}

/// Invert the matching map.
///
/// Covered leaves pin the choices; uncovered left-shore vertices fall to
/// their smallest neighbor and uncovered right-shore vertices rise to their
/// largest; a mutually selecting pair is minus exactly when its base edge is
/// in the matching.
pub fn psi_inverse(h: &BipartiteGraph, m: &Matching) -> Result<CliqueVector, MatchingError> {
    let w = crate::graph::whisker(h);
    m.validate(&w)?;
    let nm = h.vertex_count();
    let mut choices = vec![0usize; nm];
    for e in m.edges() {
        match *e {
            WEdge::Base { i, j } => {
                choices[i - 1] = j;
                choices[j - 1] = i;
            }
            WEdge::Leaf { v, u } => choices[v - 1] = u,
        }
    }
    for v in 1..=nm {
        if choices[v - 1] == 0 {
            let nbrs = h.neighbors(v);
            choices[v - 1] = if h.in_left_shore(v) {
                nbrs[0]
            } else {
                *nbrs.last().expect("degree >= 2")
            };
        }
    }
    let mut signs = vec![Sign::Minus; h.edge_count()];
    for (pos, &(i, j)) in h.edges().iter().enumerate() {
        if choices[i - 1] == j && choices[j - 1] == i && !m.contains(&WEdge::Base { i, j }) {
            signs[pos] = Sign::Plus;
        }
    }
    let a = CliqueVector::new(choices, signs);
    let back = psi(h, &a).map_err(MatchingError::InvalidVector)?;
    if &back != m {
        return Err(MatchingError::RoundTrip(format!(
            "psi(psi_inverse(M)) disagrees with M at vector {a}"
        )));
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cliques::enumerate_clique_vectors;
    use crate::corpus;
    use crate::graph::whisker;

    fn vec_k32(choices: [usize; 5], plus_edges: &[(usize, usize)]) -> CliqueVector {
        let h = corpus::k32();
        let mut signs = vec![Sign::Minus; h.edge_count()];
        for &(i, j) in plus_edges {
            signs[h.edge_position(i, j).unwrap()] = Sign::Plus;
        }
        CliqueVector::new(choices.to_vec(), signs)
    }

    #[test]
    fn empty_matching_always_counted() {
        let w = whisker(&corpus::k32());
        let all = enumerate_matchings(&w);
        assert!(all.contains(&Matching::empty()));
        let mu = matching_polynomial(&w);
        assert_eq!(mu.coeff(0), BigInt::from(1));
    }

    #[test]
    fn singleton_matchings_count_the_edges() {
        let w = whisker(&corpus::k32());
        assert_eq!(matching_polynomial(&w).coeff(1), BigInt::from(13));
        assert_eq!(w.edge_count(), 13);
    }

    #[test]
    fn matching_polynomial_fixtures() {
        // frozen coefficient vectors, derived by splitting on the set of
        // pendant edges used and counting matchings of the leftover
        // complete bipartite pieces by hand
        let mu22 = matching_polynomial(&whisker(&corpus::k22()));
        assert_eq!(mu22, Polynomial::from_u64(&[1, 8, 16, 8, 1]));
        let mu32 = matching_polynomial(&whisker(&corpus::k32()));
        assert_eq!(mu32, Polynomial::from_u64(&[1, 13, 49, 61, 28, 4]));
    }

    #[test]
    fn totals_match_clique_vector_counts() {
        for g in corpus::all() {
            let w = whisker(&g.graph);
            let total = matching_polynomial(&w).coefficient_sum();
            let vectors = enumerate_clique_vectors(&g.graph).len();
            assert_eq!(total, BigInt::from(vectors), "{}", g.name);
            assert_eq!(enumerate_matchings(&w).len(), vectors, "{}", g.name);
        }
    }

    #[test]
    fn degree_bound() {
        for g in corpus::all() {
            let w = whisker(&g.graph);
            let mu = matching_polynomial(&w);
            assert!(mu.degree() <= w.vertex_count() / 2, "{}", g.name);
        }
    }

    #[test]
    fn enumeration_is_duplicate_free() {
        let w = whisker(&corpus::k22());
        let mut all = enumerate_matchings(&w);
        let count = all.len();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), count);
        for m in &all {
            assert_eq!(m.validate(&w), Ok(()));
        }
    }

    #[test]
    fn simple_graph_polynomial_agrees_with_whiskered() {
        for g in [corpus::k22(), corpus::c6()] {
            let w = whisker(&g);
            assert_eq!(
                matching_polynomial(&w),
                matching_polynomial_simple(&w.to_simple_graph())
            );
        }
    }

    #[test]
    fn psi_worked_example_minus() {
        let h = corpus::k32();
        let a = vec_k32([4, 5, 4, 1, 3], &[]);
        let m = psi(&h, &a).unwrap();
        let expected = Matching::new([WEdge::Base { i: 1, j: 4 }, WEdge::Leaf { v: 2, u: 5 }]);
        assert_eq!(m, expected);
        // vertex 3 selects its smallest neighbor, so nothing covers it
        assert!(!m.covers(3));
        assert!(!m.covers(5));
    }

    #[test]
    fn psi_worked_example_plus() {
        let h = corpus::k32();
        let a = vec_k32([4, 5, 4, 1, 3], &[(1, 4)]);
        let m = psi(&h, &a).unwrap();
        // the leaf w_{1,4} does not exist, so only the right-side leaf appears
        let expected = Matching::new([WEdge::Leaf { v: 2, u: 5 }, WEdge::Leaf { v: 4, u: 1 }]);
        assert_eq!(m, expected);
    }

    #[test]
    fn psi_inverse_worked_examples() {
        let h = corpus::k32();
        let m = Matching::new([WEdge::Base { i: 1, j: 4 }, WEdge::Leaf { v: 2, u: 5 }]);
        assert_eq!(psi_inverse(&h, &m).unwrap(), vec_k32([4, 5, 4, 1, 3], &[]));
        let m2 = Matching::new([WEdge::Leaf { v: 2, u: 5 }, WEdge::Leaf { v: 4, u: 1 }]);
        assert_eq!(
            psi_inverse(&h, &m2).unwrap(),
            vec_k32([4, 5, 4, 1, 3], &[(1, 4)])
        );
    }

    #[test]
    fn psi_inverse_of_empty_matching() {
        let h = corpus::k32();
        let a = psi_inverse(&h, &Matching::empty()).unwrap();
        // uncovered vertices: smallest neighbors on the left, largest on the
        // right; the mutually selecting pair (3,4) left out of the matching
        // must carry a plus
        assert_eq!(a.choices(), &[4, 4, 4, 3, 3]);
        assert_eq!(a.sign(&h, 3, 4), Some(Sign::Plus));
        let other_signs: Vec<Sign> = h
            .edges()
            .iter()
            .filter(|&&(i, j)| (i, j) != (3, 4))
            .map(|&(i, j)| a.sign(&h, i, j).unwrap())
            .collect();
        assert!(other_signs.iter().all(|&s| s == Sign::Minus));
        assert_eq!(psi(&h, &a).unwrap(), Matching::empty());
    }

    #[test]
    fn psi_bijection_on_corpus() {
        for g in corpus::all() {
            let w = whisker(&g.graph);
            let mut image: Vec<Matching> = enumerate_clique_vectors(&g.graph)
                .iter()
                .map(|a| psi(&g.graph, a).unwrap())
                .collect();
            let before = image.len();
            image.sort_unstable();
            image.dedup();
            assert_eq!(image.len(), before, "psi not injective on {}", g.name);
            let mut all = enumerate_matchings(&w);
            all.sort_unstable();
            assert_eq!(image, all, "psi image mismatch on {}", g.name);
        }
    }

    #[test]
    fn psi_round_trip_on_corpus() {
        for g in corpus::all() {
            for a in enumerate_clique_vectors(&g.graph) {
                let m = psi(&g.graph, &a).unwrap();
                assert_eq!(psi_inverse(&g.graph, &m).unwrap(), a, "{}", g.name);
            }
        }
    }

    #[test]
    fn matching_validation_errors() {
        let h = corpus::k32();
        let w = whisker(&h);
        let bogus = Matching::new([WEdge::Leaf { v: 1, u: 4 }]);
        assert_eq!(
            bogus.validate(&w),
            Err(MatchingError::EdgeNotInGraph("w_1_4-1".into()))
        );
        let overlapping = Matching::new([WEdge::Base { i: 1, j: 4 }, WEdge::Leaf { v: 4, u: 1 }]);
        assert!(matches!(
            overlapping.validate(&w),
            Err(MatchingError::SharedVertex(_, _, 4))
        ));
    }

    #[test]
    fn log_concave_and_unimodal_coefficients() {
        for g in corpus::all() {
            let mu = matching_polynomial(&whisker(&g.graph));
            assert!(mu.all_nonnegative(), "{}", g.name);
            assert!(mu.is_log_concave(), "{}", g.name);
            assert!(mu.is_unimodal(), "{}", g.name);
        }
    }

    #[test]
    fn edge_tokens() {
        assert_eq!(WEdge::Base { i: 1, j: 4 }.token(), "14");
        assert_eq!(WEdge::Leaf { v: 2, u: 5 }.token(), "w_2_5-2");
    }
}
