//! Clique vectors, the clique map `phi` with its inverse, and an independent
//! maximal-clique search over the coherence graph.
//!
//! A clique vector picks a neighbor `a_v` for every vertex of `H` plus a sign
//! per edge; `phi` expands it edge by edge into a maximal set of pairwise
//! coherent routes. The Bron-Kerbosch oracle knows nothing about `phi` and
//! recovers the same maximal cliques directly from the coherence graph.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

use crate::graph::{BipartiteGraph, ExtendedDag};
use crate::routes::{conflict, CoherenceGraph, Route};

/// Sign entry of a clique vector; `Minus` is the default for every edge,
/// `Plus` is allowed only when the edge's endpoints select each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Minus => "-",
            Sign::Plus => "+",
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CliqueError {
    #[error("expected {expected_choices} vertex entries and {expected_signs} sign entries, got {got_choices} and {got_signs}")]
    Arity {
        expected_choices: usize,
        expected_signs: usize,
        got_choices: usize,
        got_signs: usize,
    },
    #[error("entry a_{v} = {value} is not a neighbor of vertex {v}")]
    NotANeighbor { v: usize, value: usize },
    #[error(
        "sign entry a_{{{i},{j}}} is + but a_{i} = {ai} and a_{j} = {aj} do not select each other"
    )]
    SignNotAllowed {
        i: usize,
        j: usize,
        ai: usize,
        aj: usize,
    },
    #[error("clique has {got} routes, maximal cliques have exactly {expected}")]
    NotMaximal { expected: usize, got: usize },
    #[error("routes {r1} and {r2} are in conflict")]
    Incoherent { r1: String, r2: String },
    #[error("edge ({i},{j}) supports {count} routes; a maximal clique supports 1, 2, or 3")]
    BadSupport { i: usize, j: usize, count: usize },
    #[error("clique is not in the image of the clique map: {0}")]
    NotInImage(String),
}

/// Vector encoding of a maximal clique: a neighbor choice `a_v` per vertex of
/// `H` and a sign per edge of `H` (stored in lexicographic edge order).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CliqueVector {
    choices: Vec<usize>, // index v-1 -> a_v
    signs: Vec<Sign>,    // aligned with BipartiteGraph::edges()
}

impl CliqueVector {
    pub fn new(choices: Vec<usize>, signs: Vec<Sign>) -> Self {
        Self { choices, signs }
    }

    /// The neighbor selected by vertex `v`.
    pub fn choice(&self, v: usize) -> usize {
        self.choices[v - 1]
    }

    pub fn choices(&self) -> &[usize] {
        &self.choices
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    /// Sign of edge `(i, j)` of `H`.
    pub fn sign(&self, h: &BipartiteGraph, i: usize, j: usize) -> Option<Sign> {
        h.edge_position(i, j).map(|p| self.signs[p])
    }

    /// Check both defining conditions against `H`.
    pub fn validate(&self, h: &BipartiteGraph) -> Result<(), CliqueError> {
        let nm = h.vertex_count();
        if self.choices.len() != nm || self.signs.len() != h.edge_count() {
            return Err(CliqueError::Arity {
                expected_choices: nm,
                expected_signs: h.edge_count(),
                got_choices: self.choices.len(),
                got_signs: self.signs.len(),
            });
        }
        for v in 1..=nm {
            let value = self.choice(v);
            if h.neighbors(v).binary_search(&value).is_err() {
                return Err(CliqueError::NotANeighbor { v, value });
            }
        }
        for (pos, &(i, j)) in h.edges().iter().enumerate() {
            if self.signs[pos] == Sign::Plus && !(self.choice(i) == j && self.choice(j) == i) {
                return Err(CliqueError::SignNotAllowed {
                    i,
                    j,
                    ai: self.choice(i),
                    aj: self.choice(j),
                });
            }
        }
        Ok(())
    }

    /// JSON form `{"a":[...],"signs":{"i-j":"+",...}}`; only plus signs are listed.
    pub fn to_json(&self, h: &BipartiteGraph) -> Value {
        let mut signs = BTreeMap::new();
        for (pos, &(i, j)) in h.edges().iter().enumerate() {
            if self.signs[pos] == Sign::Plus {
                signs.insert(format!("{i}-{j}"), "+");
            }
        }
        json!({ "a": self.choices, "signs": signs })
    }
}

impl fmt::Display for CliqueVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.choices.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        for s in &self.signs {
            write!(f, ",{s}")?;
        }
        write!(f, ")")
    }
}

/// Validate a clique vector, reporting the first violated condition.
pub fn validate_clique_vector(h: &BipartiteGraph, a: &CliqueVector) -> Result<(), CliqueError> {
    a.validate(h)
}

/// All valid clique vectors of `H`.
///
/// Vertex choices run in odometer order over sorted neighbor lists (the last
/// vertex cycling fastest); for each choice the sign patterns over mutually
/// selecting edges follow, all-minus first.
pub fn enumerate_clique_vectors(h: &BipartiteGraph) -> Vec<CliqueVector> {
    let nm = h.vertex_count();
    let mut out = Vec::new();
    let mut cursor = vec![0usize; nm];
    loop {
        let choices: Vec<usize> = (1..=nm).map(|v| h.neighbors(v)[cursor[v - 1]]).collect();
        // edges whose endpoints select each other admit either sign
        let mutual: Vec<usize> = h
            .edges()
            .iter()
            .enumerate()
            .filter(|&(_, &(i, j))| choices[i - 1] == j && choices[j - 1] == i)
            .map(|(pos, _)| pos)
            .collect();
        for mask in 0u64..(1u64 << mutual.len()) {
            let mut signs = vec![Sign::Minus; h.edge_count()];
            for (bit, &pos) in mutual.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    signs[pos] = Sign::Plus;
                }
            }
            out.push(CliqueVector::new(choices.clone(), signs));
        }
        // advance the odometer, last vertex fastest
        let mut v = nm;
        loop {
            if v == 0 {
                return out;
            }
            cursor[v - 1] += 1;
            if cursor[v - 1] < h.degree(v) {
                break;
            }
            cursor[v - 1] = 0;
            v -= 1;
        }
    }
}

/// A set of pairwise coherent routes in canonical (sorted) order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clique {
    routes: Vec<Route>,
}

impl Clique {
    pub fn new(mut routes: Vec<Route>) -> Self {
        routes.sort_unstable();
        routes.dedup();
        Self { routes }
    }

    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    pub fn len(&self) -> usize {
        self.routes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }

    pub fn contains(&self, r: &Route) -> bool {
        self.routes.binary_search(r).is_ok()
    }

    /// Routes in `self` but not in `other`.
    pub fn difference(&self, other: &Clique) -> Vec<Route> {
        self.routes
            .iter()
            .filter(|r| !other.contains(r))
            .copied()
            .collect()
    }

    /// Verify that all routes are pairwise coherent.
    pub fn check_coherent(&self) -> Result<(), CliqueError> {
        for p in 0..self.routes.len() {
            for q in p + 1..self.routes.len() {
                if conflict(&self.routes[p], &self.routes[q]).is_some() {
                    return Err(CliqueError::Incoherent {
                        r1: self.routes[p].token(),
                        r2: self.routes[q].token(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!(self.routes.iter().map(Route::token).collect::<Vec<_>>())
    }
}

/// The clique map: expand a clique vector into its maximal clique.
///
/// For each edge `ij` the admissible alpha copies are `{2}`, `{1}`, or
/// `{1,2}` according to `a_i < j`, `a_i > j`, or `a_i = j`, and likewise for
/// gamma copies via `a_j` against `i`. The clique takes the product of the
/// two ranges, except that when both ranges are `{1,2}` the sign drops one
/// of the two crossing middle routes: minus keeps `(1,2)`, plus keeps `(2,1)`.
pub fn phi(h: &BipartiteGraph, a: &CliqueVector) -> Result<Clique, CliqueError> {
    a.validate(h)?;
    let mut routes = Vec::with_capacity(h.vertex_count() + h.edge_count());
    for (pos, &(i, j)) in h.edges().iter().enumerate() {
        let alphas: &[u8] = match a.choice(i).cmp(&j) {
            Ordering::Less => &[2],
            Ordering::Greater => &[1],
            Ordering::Equal => &[1, 2],
        };
        let gammas: &[u8] = match a.choice(j).cmp(&i) {
            Ordering::Less => &[2],
            Ordering::Greater => &[1],
            Ordering::Equal => &[1, 2],
        };
        let doubled = alphas.len() == 2 && gammas.len() == 2;
        for &x in alphas {
            for &y in gammas {
                if doubled {
                    // drop the crossing middle route the sign excludes
                    let excluded = match a.signs[pos] {
                        Sign::Minus => (2, 1),
                        Sign::Plus => (1, 2),
                    };
                    if (x, y) == excluded {
                        continue;
                    }
                }
                routes.push(Route::new(i, j, x, y));
            }
        }
    }
    Ok(Clique::new(routes))
}

/// Invert the clique map: reconstruct the vector from the support pattern of
/// a maximal clique.
///
/// A triple-supported edge pins both endpoint choices and its sign; a
/// double-supported edge pins the choice on whichever side varies. The
/// result is checked by expanding it back through [`phi`].
pub fn phi_inverse(h: &BipartiteGraph, c: &Clique) -> Result<CliqueVector, CliqueError> {
    let expected = h.vertex_count() + h.edge_count();
    if c.len() != expected {
        return Err(CliqueError::NotMaximal {
            expected,
            got: c.len(),
        });
    }
    c.check_coherent()?;

    let nm = h.vertex_count();
    let mut choices = vec![0usize; nm];
    let mut signs = vec![Sign::Minus; h.edge_count()];
    let set_choice = |choices: &mut Vec<usize>, v: usize, val: usize| {
        if choices[v - 1] != 0 && choices[v - 1] != val {
            return Err(CliqueError::NotInImage(format!(
                "vertex {v} is doubled on two different edges"
            )));
        }
        choices[v - 1] = val;
        Ok(())
    };

    for (pos, &(i, j)) in h.edges().iter().enumerate() {
        let support: Vec<&Route> = c.routes().iter().filter(|r| r.i == i && r.j == j).collect();
        match support.len() {
            1 => {}
            2 => {
                let (r1, r2) = (support[0], support[1]);
                if r1.a != r2.a && r1.b == r2.b {
                    set_choice(&mut choices, i, j)?;
                } else if r1.a == r2.a && r1.b != r2.b {
                    set_choice(&mut choices, j, i)?;
                } else {
                    return Err(CliqueError::NotInImage(format!(
                        "edge ({i},{j}) supports two routes varying in both copies"
                    )));
                }
            }
            3 => {
                set_choice(&mut choices, i, j)?;
                set_choice(&mut choices, j, i)?;
                // the surviving middle route tells the sign
                let has_21 = support.iter().any(|r| (r.a, r.b) == (2, 1));
                let has_12 = support.iter().any(|r| (r.a, r.b) == (1, 2));
                signs[pos] = match (has_21, has_12) {
                    (true, false) => Sign::Plus,
                    (false, true) => Sign::Minus,
                    _ => {
                        return Err(CliqueError::NotInImage(format!(
                            "edge ({i},{j}) has an impossible triple support"
                        )))
                    }
                };
            }
            count => return Err(CliqueError::BadSupport { i, j, count }),
        }
    }

    if let Some(v) = (1..=nm).find(|&v| choices[v - 1] == 0) {
        return Err(CliqueError::NotInImage(format!(
            "vertex {v} has no doubled edge"
        )));
    }
    let a = CliqueVector::new(choices, signs);
    let back = phi(h, &a)?;
    if &back != c {
        return Err(CliqueError::NotInImage(
            "support pattern is inconsistent with the clique map".into(),
        ));
    }
    Ok(a)
}

/// All maximal cliques of the coherence graph via Bron-Kerbosch with
/// pivoting, sorted canonically. Independent of [`phi`]; used to verify it.
pub fn enumerate_maximal_cliques_oracle(dag: &ExtendedDag) -> Vec<Clique> {
    let cg = CoherenceGraph::new(dag);
    let words = cg.word_count();
    let n = cg.route_count();
    let mut p = vec![u64::MAX; words];
    if !n.is_multiple_of(64) {
        p[words - 1] = (1u64 << (n % 64)) - 1;
    }
    if n == 0 {
        return Vec::new();
    }
    let x = vec![0u64; words];
    let mut found: Vec<Vec<usize>> = Vec::new();
    bron_kerbosch(&cg, &mut Vec::new(), p, x, &mut found);
    let mut cliques: Vec<Clique> = found
        .into_iter()
        .map(|idxs| Clique::new(idxs.into_iter().map(|k| cg.routes()[k]).collect()))
        .collect();
    cliques.sort_unstable();
    cliques
}

fn ones(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(w, &bits)| {
        let mut rest = bits;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * 64 + b)
            }
        })
    })
}

fn count_and(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

fn is_empty(a: &[u64]) -> bool {
    a.iter().all(|&w| w == 0)
}

fn bron_kerbosch(
    cg: &CoherenceGraph,
    r: &mut Vec<usize>,
    p: Vec<u64>,
    x: Vec<u64>,
    out: &mut Vec<Vec<usize>>,
) {
    if is_empty(&p) && is_empty(&x) {
        out.push(r.clone());
        return;
    }
    // pivot on the candidate covering the most of p
    let pivot = ones(&p)
        .chain(ones(&x))
        .max_by_key(|&u| count_and(&p, cg.neighbors_bitset(u)))
        .expect("p or x nonempty");
    let mut todo = p.clone();
    for (w, nb) in todo.iter_mut().zip(cg.neighbors_bitset(pivot)) {
        *w &= !nb;
    }
    let mut p = p;
    let mut x = x;
    for v in ones(&todo.clone()) {
        let nb = cg.neighbors_bitset(v);
        let next_p: Vec<u64> = p.iter().zip(nb).map(|(a, b)| a & b).collect();
        let next_x: Vec<u64> = x.iter().zip(nb).map(|(a, b)| a & b).collect();
        r.push(v);
        bron_kerbosch(cg, r, next_p, next_x, out);
        r.pop();
        p[v / 64] &= !(1 << (v % 64));
        x[v / 64] |= 1 << (v % 64);
    }
}
