//! The framing lattice on clique vectors: the cover relation, upper covers
//! via edge actions on the matching, the rotation-based cover oracle, and the
//! full cover digraph with its structural checks.
//!
//! Covers go upward: `a` is covered by `b` when the clique of `b` is reached
//! from the clique of `a` by rotating a single route counterclockwise.

use std::collections::HashMap;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::cliques::{enumerate_clique_vectors, phi, Clique, CliqueError, CliqueVector, Sign};
use crate::graph::BipartiteGraph;
use crate::matchings::psi;
use crate::rng::SplitMix64;
use crate::routes::{cw_cmp, Orientation, Route};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error(transparent)]
    InvalidVector(#[from] CliqueError),
    #[error("cover conditions {0} and {1} both match; the characterization requires exactly one")]
    AmbiguousWitness(u8, u8),
    #[error("cover count mismatch: {edge_moves} edge actions but {matching_edges} matching edges")]
    CoverCountMismatch {
        edge_moves: usize,
        matching_edges: usize,
    },
    #[error("route set is not contained in any maximal clique: {0}")]
    NoContainingClique(String),
}

/// A single changed entry between two clique vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EntryChange {
    Choice { v: usize, old: usize, new: usize },
    SignFlip { i: usize, j: usize },
}

/// Witness that `b` covers `a`: the matched condition of the cover
/// characterization (1-4) and the entries that changed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverWitness {
    pub condition: u8,
    pub changes: Vec<EntryChange>,
}

fn largest_below(h: &BipartiteGraph, v: usize, x: usize) -> Option<usize> {
    h.neighbors(v).iter().copied().filter(|&u| u < x).max()
}

fn smallest_above(h: &BipartiteGraph, v: usize, x: usize) -> Option<usize> {
    h.neighbors(v).iter().copied().filter(|&u| u > x).min()
}

/// Decide whether `phi(b)` covers `phi(a)` in the framing lattice, by the
/// four-case characterization of the cover relation on clique vectors.
///
/// Exactly one case may hold; two simultaneous matches signal an internal
/// bug and surface as [`LatticeError::AmbiguousWitness`].
pub fn covers(
    h: &BipartiteGraph,
    a: &CliqueVector,
    b: &CliqueVector,
) -> Result<Option<CoverWitness>, LatticeError> {
    a.validate(h)?;
    b.validate(h)?;

    let diff_choices: Vec<usize> = (1..=h.vertex_count())
        .filter(|&v| a.choice(v) != b.choice(v))
        .collect();
    let diff_signs: Vec<usize> = (0..h.edge_count())
        .filter(|&p| a.signs()[p] != b.signs()[p])
        .collect();

    let mut matches: Vec<CoverWitness> = Vec::new();

    // conditions 1 and 2: one choice moves, no signs move
    if diff_signs.is_empty() && diff_choices.len() == 1 {
        let v = diff_choices[0];
        let old = a.choice(v);
        let new = b.choice(v);
        let change = EntryChange::Choice { v, old, new };
        if h.in_left_shore(v) {
            // the selected neighbor does not reciprocate, and the move is to
            // the largest neighbor below it
            if a.choice(old) != v && largest_below(h, v, old) == Some(new) {
                matches.push(CoverWitness {
                    condition: 1,
                    changes: vec![change],
                });
            }
        } else if a.choice(old) != v && smallest_above(h, v, old) == Some(new) {
            matches.push(CoverWitness {
                condition: 2,
                changes: vec![change],
            });
        }
    }

    // condition 3: a single sign flips from minus to plus
    if diff_choices.is_empty() && diff_signs.len() == 1 {
        let pos = diff_signs[0];
        let (i, j) = h.edges()[pos];
        if a.signs()[pos] == Sign::Minus && b.signs()[pos] == Sign::Plus {
            matches.push(CoverWitness {
                condition: 3,
                changes: vec![EntryChange::SignFlip { i, j }],
            });
        }
    }

    // condition 4: one plus drops to minus and the released endpoint moves
    if diff_signs.len() == 1 && diff_choices.len() == 1 {
        let pos = diff_signs[0];
        let (i, j) = h.edges()[pos];
        let v = diff_choices[0];
        if a.signs()[pos] == Sign::Plus && b.signs()[pos] == Sign::Minus {
            let moved_left = v == i && largest_below(h, i, j) == Some(b.choice(i));
            let moved_right = v == j && smallest_above(h, j, i) == Some(b.choice(j));
            if moved_left || moved_right {
                matches.push(CoverWitness {
                    condition: 4,
                    changes: vec![
                        EntryChange::SignFlip { i, j },
                        EntryChange::Choice {
                            v,
                            old: a.choice(v),
                            new: b.choice(v),
                        },
                    ],
                });
            }
        }
    }

    match matches.len() {
        0 => Ok(None),
        1 => Ok(Some(matches.pop().expect("one witness"))),
        _ => Err(LatticeError::AmbiguousWitness(
            matches[0].condition,
            matches[1].condition,
        )),
    }
}

/// All vectors covering `a`, one per edge of the matching `psi(a)`.
///
/// Each matching edge admits one action: a leaf edge slides toward the
/// absent-leaf end (conditions 1/2), a base edge flips its sign to plus
/// (condition 3), and a plus pair releases either endpoint (condition 4).
pub fn upper_covers(
    h: &BipartiteGraph,
    a: &CliqueVector,
) -> Result<Vec<CliqueVector>, LatticeError> {
    a.validate(h)?;
    let mut out = Vec::new();
    let with_choice = |a: &CliqueVector, v: usize, new: usize, signs: Vec<Sign>| {
        let mut choices = a.choices().to_vec();
        choices[v - 1] = new;
        CliqueVector::new(choices, signs)
    };

    for i in 1..=h.n() {
        let j = a.choice(i);
        if a.choice(j) != i {
            if let Some(j2) = largest_below(h, i, j) {
                out.push(with_choice(a, i, j2, a.signs().to_vec()));
            }
        }
    }
    for j in h.n() + 1..=h.vertex_count() {
        let i = a.choice(j);
        if a.choice(i) != j {
            if let Some(i2) = smallest_above(h, j, i) {
                out.push(with_choice(a, j, i2, a.signs().to_vec()));
            }
        }
    }
    for (pos, &(i, j)) in h.edges().iter().enumerate() {
        if a.choice(i) != j || a.choice(j) != i {
            continue;
        }
        match a.signs()[pos] {
            Sign::Minus => {
                let mut signs = a.signs().to_vec();
                signs[pos] = Sign::Plus;
                out.push(CliqueVector::new(a.choices().to_vec(), signs));
            }
            Sign::Plus => {
                if let Some(j2) = largest_below(h, i, j) {
                    let mut signs = a.signs().to_vec();
                    signs[pos] = Sign::Minus;
                    out.push(with_choice(a, i, j2, signs));
                }
                if let Some(i2) = smallest_above(h, j, i) {
                    let mut signs = a.signs().to_vec();
                    signs[pos] = Sign::Minus;
                    out.push(with_choice(a, j, i2, signs));
                }
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Number of cliques covering `phi(a)`: the edge count of `psi(a)`, checked
/// against the number of generated cover moves.
pub fn cover_count(h: &BipartiteGraph, a: &CliqueVector) -> Result<usize, LatticeError> {
    let moves = upper_covers(h, a)?.len();
    let matching_edges = psi(h, a)?.len();
    if moves != matching_edges {
        return Err(LatticeError::CoverCountMismatch {
            edge_moves: moves,
            matching_edges,
        });
    }
    Ok(matching_edges)
}

/// Rotation oracle for the cover relation, straight from the definition:
/// the cliques share all routes but one, and the departing route of `c1` is
/// clockwise of the arriving route of `c2`.
pub fn covers_oracle(c1: &Clique, c2: &Clique) -> bool {
    let out: Vec<Route> = c1.difference(c2);
    let inn: Vec<Route> = c2.difference(c1);
    if out.len() != 1 || inn.len() != 1 {
        return false;
    }
    cw_cmp(&out[0], &inn[0]) == Ok(Orientation::FirstCwOfSecond)
}

/// The maximal clique vector whose clique contains a given coherent route
/// set: left-shore choices drop to the tightest lower bound the routes
/// impose, right-shore choices rise to the tightest upper bound, and mutual
/// pairs take plus unless the route set itself pins the minus middle route.
pub fn max_clique_vector_over(
    h: &BipartiteGraph,
    routes: &[Route],
) -> Result<CliqueVector, LatticeError> {
    let nm = h.vertex_count();
    // per-vertex bounds: alpha copy 1 forces a_i >= j, copy 2 forces a_i <= j;
    // gamma copy 1 forces a_j >= i, copy 2 forces a_j <= i
    let mut lower = vec![0usize; nm + 1];
    let mut upper = vec![usize::MAX; nm + 1];
    for r in routes {
        if r.a == 1 {
            lower[r.i] = lower[r.i].max(r.j);
        } else {
            upper[r.i] = upper[r.i].min(r.j);
        }
        if r.b == 1 {
            lower[r.j] = lower[r.j].max(r.i);
        } else {
            upper[r.j] = upper[r.j].min(r.i);
        }
    }
    let mut choices = vec![0usize; nm];
    for v in 1..=nm {
        let nbrs = h.neighbors(v);
        let pick = if h.in_left_shore(v) {
            if lower[v] == 0 {
                nbrs[0]
            } else {
                lower[v]
            }
        } else if upper[v] == usize::MAX {
            *nbrs.last().expect("degree >= 2")
        } else {
            upper[v]
        };
        choices[v - 1] = pick;
    }
    let mut signs = vec![Sign::Minus; h.edge_count()];
    for (pos, &(i, j)) in h.edges().iter().enumerate() {
        if choices[i - 1] == j && choices[j - 1] == i {
            let pinned_minus = routes
                .iter()
                .any(|r| r.i == i && r.j == j && (r.a, r.b) == (1, 2));
            if !pinned_minus {
                signs[pos] = Sign::Plus;
            }
        }
    }
    let a = CliqueVector::new(choices, signs);
    a.validate(h)?;
    let c = phi(h, &a)?;
    if routes.iter().any(|r| !c.contains(r)) {
        return Err(LatticeError::NoContainingClique(format!(
            "constructed vector {a} misses a route"
        )));
    }
    Ok(a)
}

/// Structural summary of the cover digraph over all clique vectors.
#[derive(Debug, Clone, Serialize)]
pub struct LatticeReport {
    pub node_count: usize,
    pub cover_edge_count: usize,
    /// Index k = number of vectors covered by exactly k cliques.
    pub cover_count_histogram: Vec<usize>,
    pub acyclic: bool,
    pub unique_maximum: bool,
    pub unique_minimum: bool,
    /// Sampled verification of the saturated-chain hypothesis for the
    /// half-open decomposition.
    pub chain_samples: usize,
    pub chain_failures: usize,
}

impl LatticeReport {
    pub fn all_pass(&self) -> bool {
        self.acyclic && self.unique_maximum && self.unique_minimum && self.chain_failures == 0
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Build the full cover digraph over the clique vectors of `H`, verify its
/// poset structure, and sample the chain hypothesis `samples` times with the
/// given seed.
pub fn build_lattice(
    h: &BipartiteGraph,
    seed: u64,
    samples: usize,
) -> Result<LatticeReport, LatticeError> {
    let vectors = enumerate_clique_vectors(h);
    let index: HashMap<&CliqueVector, usize> =
        vectors.iter().enumerate().map(|(k, a)| (a, k)).collect();
    let mut up_edges: Vec<Vec<usize>> = Vec::with_capacity(vectors.len());
    for a in &vectors {
        let ups = upper_covers(h, a)?;
        // every action lands on a valid enumerated vector
        let targets: Vec<usize> = ups
            .iter()
            .map(|b| *index.get(b).expect("cover target is a valid clique vector"))
            .collect();
        if ups.len() != psi(h, a)?.len() {
            return Err(LatticeError::CoverCountMismatch {
                edge_moves: ups.len(),
                matching_edges: psi(h, a)?.len(),
            });
        }
        up_edges.push(targets);
    }

    let node_count = vectors.len();
    let cover_edge_count: usize = up_edges.iter().map(Vec::len).sum();
    let mut histogram = Vec::new();
    for ups in &up_edges {
        if ups.len() >= histogram.len() {
            histogram.resize(ups.len() + 1, 0);
        }
        histogram[ups.len()] += 1;
    }

    let mut in_degree = vec![0usize; node_count];
    for ups in &up_edges {
        for &t in ups {
            in_degree[t] += 1;
        }
    }
    let unique_maximum = up_edges.iter().filter(|u| u.is_empty()).count() == 1;
    let unique_minimum = in_degree.iter().filter(|&&d| d == 0).count() == 1;

    // Kahn's algorithm for acyclicity
    let mut degree = in_degree.clone();
    let mut stack: Vec<usize> = (0..node_count).filter(|&k| degree[k] == 0).collect();
    let mut visited = 0;
    while let Some(k) = stack.pop() {
        visited += 1;
        for &t in &up_edges[k] {
            degree[t] -= 1;
            if degree[t] == 0 {
                stack.push(t);
            }
        }
    }
    let acyclic = visited == node_count;

    // sampled chain hypothesis: every clique containing a face reaches the
    // face's maximal clique through covers that keep the face
    let cliques: Vec<Clique> = vectors
        .iter()
        .map(|a| phi(h, a).expect("enumerated vectors are valid"))
        .collect();
    let mut rng = SplitMix64::new(seed);
    let mut chain_failures = 0;
    for _ in 0..samples {
        let k = rng.below(node_count);
        let face: Vec<Route> = cliques[k]
            .routes()
            .iter()
            .filter(|_| rng.coin())
            .copied()
            .collect();
        let top = match max_clique_vector_over(h, &face) {
            Ok(a) => *index.get(&a).expect("valid vector"),
            Err(_) => {
                chain_failures += 1;
                continue;
            }
        };
        let containing: Vec<usize> = (0..node_count)
            .filter(|&q| face.iter().all(|r| cliques[q].contains(r)))
            .collect();
        if !containing.contains(&top) {
            chain_failures += 1;
            continue;
        }
        // the only sink of the face-preserving subdigraph must be the top
        for &q in &containing {
            let is_sink = !up_edges[q].iter().any(|t| containing.contains(t));
            if is_sink != (q == top) {
                chain_failures += 1;
                break;
            }
        }
    }

    Ok(LatticeReport {
        node_count,
        cover_edge_count,
        cover_count_histogram: histogram,
        acyclic,
        unique_maximum,
        unique_minimum,
        chain_samples: samples,
        chain_failures,
    })
}

/// The cover edges of the lattice as vector pairs, for export.
pub fn cover_edges(h: &BipartiteGraph) -> Result<Vec<(CliqueVector, CliqueVector)>, LatticeError> {
    let mut out = Vec::new();
    for a in enumerate_clique_vectors(h) {
        for b in upper_covers(h, &a)? {
            out.push((a.clone(), b));
        }
    }
    Ok(out)
}

/// JSON edge-list document of the cover relation.
pub fn lattice_json(h: &BipartiteGraph, report: &LatticeReport) -> Result<Value, LatticeError> {
    let edges: Vec<Value> = cover_edges(h)?
        .iter()
        .map(|(a, b)| json!([a.to_json(h), b.to_json(h)]))
        .collect();
    Ok(json!({
        "report": report.to_json(),
        "cover_edges": edges,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::graph::whisker;
    use crate::matchings::{matching_polynomial, psi_inverse, Matching};
    use num_bigint::BigInt;

    fn vec_k32(choices: [usize; 5], plus_edges: &[(usize, usize)]) -> CliqueVector {
        let h = corpus::k32();
        let mut signs = vec![Sign::Minus; h.edge_count()];
        for &(i, j) in plus_edges {
            signs[h.edge_position(i, j).unwrap()] = Sign::Plus;
        }
        CliqueVector::new(choices.to_vec(), signs)
    }

    #[test]
    fn cover_condition_examples() {
        let h = corpus::k32();
        let a = vec_k32([4, 5, 4, 1, 3], &[]);
        // flipping the mutual edge (1,4) to plus is condition 3
        let b = vec_k32([4, 5, 4, 1, 3], &[(1, 4)]);
        assert_eq!(covers(&h, &a, &b).unwrap().unwrap().condition, 3);
        // moving a_2 from 5 down to its next neighbor 4 is condition 1
        let b = vec_k32([4, 4, 4, 1, 3], &[]);
        assert_eq!(covers(&h, &a, &b).unwrap().unwrap().condition, 1);
        // releasing the plus pair by moving a_4 up to 2 is condition 4
        let a_plus = vec_k32([4, 5, 4, 1, 3], &[(1, 4)]);
        let b = vec_k32([4, 5, 4, 2, 3], &[]);
        assert_eq!(covers(&h, &a_plus, &b).unwrap().unwrap().condition, 4);
    }

    #[test]
    fn non_covers_return_none() {
        let h = corpus::k32();
        let a = vec_k32([4, 5, 4, 1, 3], &[]);
        // same vector
        assert_eq!(covers(&h, &a, &a).unwrap(), None);
        // two choice entries differ
        let b = vec_k32([5, 4, 4, 1, 3], &[]);
        assert_eq!(covers(&h, &a, &b).unwrap(), None);
        // wrong direction sign flip
        let a_plus = vec_k32([4, 5, 4, 1, 3], &[(1, 4)]);
        assert_eq!(covers(&h, &a_plus, &a).unwrap(), None);
        // jump past the largest neighbor below is not a cover
        let g = corpus::k33();
        let from = CliqueVector::new(vec![6, 4, 4, 2, 3, 3], vec![Sign::Minus; 9]);
        let to = CliqueVector::new(vec![4, 4, 4, 2, 3, 3], vec![Sign::Minus; 9]);
        assert_eq!(covers(&g, &from, &to).unwrap(), None);
    }

    #[test]
    fn worked_example_has_exactly_two_upper_covers() {
        let h = corpus::k32();
        let a = vec_k32([4, 5, 4, 1, 3], &[]);
        let ups = upper_covers(&h, &a).unwrap();
        assert_eq!(ups.len(), 2);
        assert!(ups.contains(&vec_k32([4, 4, 4, 1, 3], &[])));
        assert!(ups.contains(&vec_k32([4, 5, 4, 1, 3], &[(1, 4)])));
        assert_eq!(cover_count(&h, &a).unwrap(), 2);
    }

    #[test]
    fn top_element_has_no_upper_covers() {
        for g in corpus::all() {
            let top = psi_inverse(&g.graph, &Matching::empty()).unwrap();
            assert_eq!(cover_count(&g.graph, &top).unwrap(), 0, "{}", g.name);
            // and it is the only such vector
            let zero_cover = enumerate_clique_vectors(&g.graph)
                .iter()
                .filter(|a| upper_covers(&g.graph, a).unwrap().is_empty())
                .count();
            assert_eq!(zero_cover, 1, "{}", g.name);
        }
    }

    #[test]
    fn all_upper_covers_satisfy_the_characterization() {
        let h = corpus::k32();
        for a in enumerate_clique_vectors(&h) {
            for b in upper_covers(&h, &a).unwrap() {
                assert!(covers(&h, &a, &b).unwrap().is_some(), "{a} -> {b}");
            }
        }
    }

    #[test]
    fn characterization_agrees_with_rotation_oracle() {
        for g in [corpus::k22(), corpus::k32()] {
            let vectors = enumerate_clique_vectors(&g);
            let cliques: Vec<Clique> = vectors.iter().map(|a| phi(&g, a).unwrap()).collect();
            for (p, a) in vectors.iter().enumerate() {
                for (q, b) in vectors.iter().enumerate() {
                    let by_conditions = covers(&g, a, b).unwrap().is_some();
                    let by_rotation = covers_oracle(&cliques[p], &cliques[q]);
                    assert_eq!(by_conditions, by_rotation, "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn cover_counts_match_matching_sizes() {
        let h = corpus::k32();
        for a in enumerate_clique_vectors(&h) {
            assert_eq!(cover_count(&h, &a).unwrap(), psi(&h, &a).unwrap().len());
        }
    }

    #[test]
    fn oracle_rejects_identity_and_distant_cliques() {
        let h = corpus::k32();
        let c1 = phi(&h, &vec_k32([4, 5, 4, 1, 3], &[])).unwrap();
        assert!(!covers_oracle(&c1, &c1));
        let far = phi(&h, &vec_k32([5, 4, 5, 2, 1], &[])).unwrap();
        assert!(!covers_oracle(&c1, &far));
    }

    #[test]
    fn lattice_report_k32() {
        let h = corpus::k32();
        let report = build_lattice(&h, 20240601, 200).unwrap();
        assert_eq!(report.node_count, 156);
        assert!(report.acyclic);
        assert!(report.unique_maximum);
        assert!(report.unique_minimum);
        assert_eq!(report.chain_failures, 0);
        // histogram equals the matching size distribution
        let mu = matching_polynomial(&whisker(&h));
        let expected: Vec<usize> = (0..=mu.degree())
            .map(|k| usize::try_from(&mu.coeff(k)).unwrap())
            .collect();
        assert_eq!(report.cover_count_histogram, expected);
        // total edges = sum_k k * m_k
        let total: usize = expected.iter().enumerate().map(|(k, c)| k * c).sum();
        assert_eq!(report.cover_edge_count, total);
    }

    #[test]
    fn lattice_reports_pass_on_cycles() {
        for g in [corpus::c6(), corpus::k33_minus_pm()] {
            let report = build_lattice(&g, 7, 100).unwrap();
            assert!(report.all_pass());
            let mu = matching_polynomial(&whisker(&g));
            assert_eq!(BigInt::from(report.node_count), mu.coefficient_sum());
        }
    }

    #[test]
    fn max_clique_vector_over_single_routes() {
        let h = corpus::k32();
        // a route with alpha copy 1 and gamma copy 2 pins the minus middle;
        // its maximal clique must still contain it
        let r = Route::new(1, 4, 1, 2);
        let a = max_clique_vector_over(&h, &[r]).unwrap();
        assert!(phi(&h, &a).unwrap().contains(&r));
        assert_eq!(a.sign(&h, 1, 4), Some(Sign::Minus));
        // the empty face gives the global maximum
        let top = max_clique_vector_over(&h, &[]).unwrap();
        assert_eq!(cover_count(&h, &top).unwrap(), 0);
    }
}
