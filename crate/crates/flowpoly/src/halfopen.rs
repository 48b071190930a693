//! Half-open decomposition of the triangulated flow polytope: each maximal
//! clique keeps its simplex minus the facets it shares with the cliques
//! covering it, and every lattice point of every dilate then has exactly one
//! owner.
//!
//! Locating a point works through the coherent decomposition: pairing the
//! flow units through each inner vertex in framing order splits an integer
//! flow of value `t` into a multiset of `t` pairwise coherent routes, whose
//! support face determines the owning clique.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::cliques::{enumerate_clique_vectors, phi, Clique, CliqueVector};
use crate::ehrhart::{enumerate_flows, EhrhartError, FlowPoint};
use crate::graph::{extend, BipartiteGraph, DagEdge, ExtendedDag};
use crate::lattice::{max_clique_vector_over, upper_covers};
use crate::linalg::solve_exact;
use crate::routes::{conflict, Route};

/// Unique half-open owner of a lattice point, with its barycentric
/// coordinates: one nonnegative integer per owner route, summing to `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfOpenMembership {
    pub owner: CliqueVector,
    pub coefficients: Vec<(Route, u64)>,
}

impl HalfOpenMembership {
    pub fn coefficient(&self, r: &Route) -> u64 {
        self.coefficients
            .iter()
            .find(|(route, _)| route == r)
            .map_or(0, |&(_, c)| c)
    }
}

/// Split an integer flow into its unique multiset of pairwise coherent
/// routes by pairing in-units with out-units in framing order at every
/// inner vertex.
pub fn coherent_decomposition(
    dag: &ExtendedDag,
    p: &FlowPoint,
) -> Result<Vec<(Route, u64)>, EhrhartError> {
    p.validate(dag)?;
    let h = dag.base();
    let val = |e: DagEdge| p.value_of(dag, e);

    // at each left vertex, units pass in order alpha_1 then alpha_2 and leave
    // along betas by ascending target; record each unit's alpha copy
    let mut alpha_copies: BTreeMap<(usize, usize), Vec<u8>> = BTreeMap::new();
    for i in 1..=h.n() {
        let first = val(DagEdge::Alpha { copy: 1, i });
        let mut passed = 0u64;
        for &j in h.neighbors(i) {
            let load = val(DagEdge::Beta { i, j });
            let copies = (0..load)
                .map(|r| if passed + r < first { 1 } else { 2 })
                .collect();
            alpha_copies.insert((i, j), copies);
            passed += load;
        }
    }
    // at each right vertex, units arrive along betas by ascending source and
    // leave along gamma_1 then gamma_2
    let mut multiset: BTreeMap<Route, u64> = BTreeMap::new();
    for j in h.n() + 1..=h.vertex_count() {
        let first = val(DagEdge::Gamma { j, copy: 1 });
        let mut passed = 0u64;
        for &i in h.neighbors(j) {
            let load = val(DagEdge::Beta { i, j });
            let copies = &alpha_copies[&(i, j)];
            for r in 0..load {
                let b = if passed + r < first { 1 } else { 2 };
                let route = Route::new(i, j, copies[r as usize], b);
                *multiset.entry(route).or_insert(0) += 1;
            }
            passed += load;
        }
    }

    let decomposition: Vec<(Route, u64)> = multiset.into_iter().collect();
    // the pairing is coherent by construction; verify anyway
    for (p1, &(r1, _)) in decomposition.iter().enumerate() {
        for &(r2, _) in &decomposition[p1 + 1..] {
            if conflict(&r1, &r2).is_some() {
                return Err(EhrhartError::Internal(format!(
                    "decomposition produced conflicting routes {r1} and {r2}"
                )));
            }
        }
    }
    let total: u64 = decomposition.iter().map(|&(_, c)| c).sum();
    if total != p.t() {
        return Err(EhrhartError::Internal(format!(
            "decomposition has {total} units, expected {}",
            p.t()
        )));
    }
    Ok(decomposition)
}

/// Exact barycentric coordinates of `p` in the simplex of `clique`, by
/// solving the vertex system over the rationals. `None` when `p` lies
/// outside the simplex.
#[allow(clippy::needless_range_loop)]
pub fn barycentric_coordinates(
    dag: &ExtendedDag,
    clique: &Clique,
    p: &FlowPoint,
) -> Result<Option<Vec<u64>>, EhrhartError> {
    let cols = clique.len();
    let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(dag.edge_count() + 1);
    let indicators: Vec<Vec<u8>> = clique
        .routes()
        .iter()
        .map(|r| r.indicator_vector(dag))
        .collect();
    for e in 0..dag.edge_count() {
        rows.push(
            (0..cols)
                .map(|k| BigRational::from_integer(BigInt::from(indicators[k][e])))
                .collect(),
        );
    }
    rows.push(vec![BigRational::from_integer(BigInt::from(1)); cols]);
    let mut rhs: Vec<BigRational> = p
        .values()
        .iter()
        .map(|&v| BigRational::from_integer(BigInt::from(v)))
        .collect();
    rhs.push(BigRational::from_integer(BigInt::from(p.t())));

    let Some(solution) = solve_exact(&rows, &rhs) else {
        return Ok(None);
    };
    let mut coords = Vec::with_capacity(cols);
    for x in &solution {
        if x < &BigRational::zero() {
            return Ok(None);
        }
        if !x.is_integer() {
            // unimodular simplices have integer barycentric coordinates at
            // lattice points
            return Err(EhrhartError::Internal(format!(
                "non-integer barycentric coordinate {x}"
            )));
        }
        coords.push(u64::try_from(x.to_integer()).expect("nonnegative"));
    }
    Ok(Some(coords))
}

/// The routes whose facets are removed from the half-open simplex of `a`:
/// one departing route per clique covering `phi(a)`.
pub fn departing_routes(h: &BipartiteGraph, a: &CliqueVector) -> Result<Vec<Route>, EhrhartError> {
    let own = phi(h, a)?;
    let mut out = Vec::new();
    for b in upper_covers(h, a)? {
        let gone = own.difference(&phi(h, &b)?);
        if gone.len() != 1 {
            return Err(EhrhartError::Internal(format!(
                "cover of {a} does not remove exactly one route"
            )));
        }
        out.push(gone[0]);
    }
    Ok(out)
}

/// Locate the unique half-open simplex containing an integer flow: the
/// maximal clique over the support of its coherent decomposition, with the
/// barycentric coordinates recovered by exact elimination.
pub fn half_open_locate(
    h: &BipartiteGraph,
    p: &FlowPoint,
) -> Result<HalfOpenMembership, EhrhartError> {
    let dag = extend(h);
    let decomposition = coherent_decomposition(&dag, p)?;
    let support: Vec<Route> = decomposition.iter().map(|&(r, _)| r).collect();
    let owner_vector = max_clique_vector_over(h, &support)?;
    let owner = phi(h, &owner_vector)?;

    let coords = barycentric_coordinates(&dag, &owner, p)?
        .ok_or_else(|| EhrhartError::Internal("owner simplex does not contain the point".into()))?;
    let coefficients: Vec<(Route, u64)> = owner.routes().iter().copied().zip(coords).collect();
    // the exact solve must reproduce the decomposition multiplicities
    for &(r, c) in &coefficients {
        let expected = decomposition
            .iter()
            .find(|&&(dr, _)| dr == r)
            .map_or(0, |&(_, m)| m);
        if c != expected {
            return Err(EhrhartError::Internal(format!(
                "barycentric solve disagrees with the coherent decomposition at {r}"
            )));
        }
    }
    // half-open membership: strictly inside every removed facet
    for dep in departing_routes(h, &owner_vector)? {
        let strict = coefficients.iter().any(|&(r, c)| r == dep && c >= 1);
        if !strict {
            return Err(EhrhartError::PartitionViolation {
                point: p.values().to_vec(),
                owners: 0,
            });
        }
    }
    Ok(HalfOpenMembership {
        owner: owner_vector,
        coefficients,
    })
}

/// Exhaustive ownership scan of one dilate.
#[derive(Debug, Clone)]
pub struct PartitionReport {
    pub t: u64,
    pub lattice_points: usize,
    pub uniquely_owned: usize,
    pub violations: Vec<String>,
}

impl PartitionReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.lattice_points == self.uniquely_owned
    }
}

fn multisets_of_size(count: usize, size: u64) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn rec(start: usize, count: usize, left: u64, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for k in start..count {
            cur.push(k);
            rec(k, count, left - 1, cur, out);
            cur.pop();
        }
    }
    rec(0, count, size, &mut Vec::new(), &mut out);
    out
}

/// Verify that every lattice point of the `t`-th dilate lies in exactly one
/// half-open simplex, by enumerating all size-`t` route multisets of every
/// maximal clique and keeping those strict at the removed facets.
pub fn half_open_partition_check(
    h: &BipartiteGraph,
    t: u64,
) -> Result<PartitionReport, EhrhartError> {
    let dag = extend(h);
    let vectors = enumerate_clique_vectors(h);
    let mut owners: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    let mut violations = Vec::new();

    for a in &vectors {
        let clique = phi(h, a)?;
        let departing = departing_routes(h, a)?;
        let routes = clique.routes();
        for multiset in multisets_of_size(routes.len(), t) {
            // strictness: every departing route appears at least once
            let strict = departing
                .iter()
                .all(|dep| multiset.iter().any(|&k| routes[k] == *dep));
            if !strict {
                continue;
            }
            let mut point = vec![0u64; dag.edge_count()];
            for &k in &multiset {
                for e in routes[k].edges() {
                    point[dag.edge_index(e).expect("route edge")] += 1;
                }
            }
            if let Some(&prev) = owners.get(&point) {
                violations.push(format!(
                    "point {point:?} owned by clique vectors #{prev} and #{}",
                    vectors.iter().position(|x| x == a).expect("present")
                ));
            } else {
                owners.insert(point, vectors.iter().position(|x| x == a).expect("present"));
            }
        }
    }

    let points = enumerate_flows(&dag, t);
    let mut uniquely_owned = 0;
    for p in &points {
        if owners.contains_key(p.values()) {
            uniquely_owned += 1;
        } else {
            violations.push(format!("point {:?} has no half-open owner", p.values()));
        }
    }
    if owners.len() != points.len() {
        violations.push(format!(
            "{} owned points vs {} lattice points",
            owners.len(),
            points.len()
        ));
    }
    Ok(PartitionReport {
        t,
        lattice_points: points.len(),
        uniquely_owned,
        violations,
    })
}
