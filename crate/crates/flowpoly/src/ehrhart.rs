//! Exact Ehrhart data for the unit flow polytope of `G(H)`: lattice point
//! counts, the interpolated Ehrhart polynomial, the h*-polynomial from both
//! pipelines, and per-clique unimodularity certificates.
//!
//! Counting uses the parallel-pair structure of the extension: a flow is
//! determined by its beta loads together with a split of each vertex load
//! across the two parallel alpha (resp. gamma) edges, so
//! `i(t) = sum over beta loads b with |b| = t of prod_v (load(v) + 1)`.
//! Everything is exact integer or rational arithmetic; floats never appear.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::cliques::{enumerate_clique_vectors, Clique, CliqueError};
use crate::graph::{BipartiteGraph, DagEdge, ExtendedDag};
use crate::lattice::{cover_count, LatticeError};
use crate::linalg::smith_normal_form;
use crate::poly::Polynomial;
use crate::workers::parallel_map;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EhrhartError {
    #[error("not a flow of value {t}: {reason}")]
    NotAFlow { t: u64, reason: String },
    #[error("h* coefficient {index} is {value}; counting is inconsistent")]
    BadHstarCoefficient { index: usize, value: String },
    #[error("simplex is not unimodular: invariant factor {0}")]
    NotUnimodular(String),
    #[error("simplex is degenerate: rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("lattice point {point:?} has {owners} half-open owners")]
    PartitionViolation { point: Vec<u64>, owners: usize },
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error(transparent)]
    InvalidVector(#[from] CliqueError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// A nonnegative integer flow on `G(H)` of total value `t` (a lattice point
/// of the `t`-th dilate of the flow polytope).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FlowPoint {
    values: Vec<u64>,
    t: u64,
}

impl FlowPoint {
    pub fn new(values: Vec<u64>, t: u64) -> Self {
        Self { values, t }
    }

    /// The indicator flow of a single route (a vertex of the polytope).
    pub fn from_route(dag: &ExtendedDag, route: &crate::routes::Route) -> Self {
        let values = route
            .indicator_vector(dag)
            .into_iter()
            .map(u64::from)
            .collect();
        Self { values, t: 1 }
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn value_of(&self, dag: &ExtendedDag, edge: DagEdge) -> u64 {
        self.values[dag.edge_index(edge).expect("edge exists")]
    }

    /// Check flow conservation at every inner vertex and total value `t`.
    pub fn validate(&self, dag: &ExtendedDag) -> Result<(), EhrhartError> {
        let h = dag.base();
        let fail = |reason: String| EhrhartError::NotAFlow { t: self.t, reason };
        if self.values.len() != dag.edge_count() {
            return Err(fail(format!(
                "expected {} edge values, got {}",
                dag.edge_count(),
                self.values.len()
            )));
        }
        let val = |e: DagEdge| self.values[dag.edge_index(e).expect("edge exists")];
        let mut total = 0u64;
        for i in 1..=h.n() {
            let inflow = val(DagEdge::Alpha { copy: 1, i }) + val(DagEdge::Alpha { copy: 2, i });
            let outflow: u64 = h
                .neighbors(i)
                .iter()
                .map(|&j| val(DagEdge::Beta { i, j }))
                .sum();
            if inflow != outflow {
                return Err(fail(format!(
                    "vertex {i} receives {inflow} but sends {outflow}"
                )));
            }
            total += inflow;
        }
        for j in h.n() + 1..=h.vertex_count() {
            let inflow: u64 = h
                .neighbors(j)
                .iter()
                .map(|&i| val(DagEdge::Beta { i, j }))
                .sum();
            let outflow = val(DagEdge::Gamma { j, copy: 1 }) + val(DagEdge::Gamma { j, copy: 2 });
            if inflow != outflow {
                return Err(fail(format!(
                    "vertex {j} receives {inflow} but sends {outflow}"
                )));
            }
        }
        if total != self.t {
            return Err(fail(format!("total flow is {total}, expected {}", self.t)));
        }
        Ok(())
    }
}

fn for_each_composition(total: u64, parts: usize, f: &mut impl FnMut(&[u64])) {
    fn recurse(buf: &mut Vec<u64>, remaining: u64, left: usize, f: &mut impl FnMut(&[u64])) {
        if left == 1 {
            buf.push(remaining);
            f(buf);
            buf.pop();
            return;
        }
        for v in 0..=remaining {
            buf.push(v);
            recurse(buf, remaining - v, left - 1, f);
            buf.pop();
        }
    }
    assert!(parts >= 1);
    recurse(&mut Vec::with_capacity(parts), total, parts, f);
}

fn product_of(factors: &[u64]) -> BigInt {
    let mut acc: u128 = 1;
    for &f in factors {
        match acc.checked_mul(f as u128) {
            Some(x) => acc = x,
            None => {
                let mut big = BigInt::one();
                for &f in factors {
                    big *= f;
                }
                return big;
            }
        }
    }
    BigInt::from(acc)
}

/// Exact number of lattice points of the `t`-th dilate: integer flows of
/// value `t`, counted via the parallel-pair product formula.
pub fn count_lattice_points(dag: &ExtendedDag, t: u64) -> BigInt {
    let h = dag.base();
    let nm = h.vertex_count();
    let mut total = BigInt::zero();
    let mut loads = vec![0u64; nm + 1];
    let mut factors = vec![0u64; nm];
    for_each_composition(t, h.edge_count(), &mut |b| {
        loads[1..=nm].fill(0);
        for (pos, &(i, j)) in h.edges().iter().enumerate() {
            loads[i] += b[pos];
            loads[j] += b[pos];
        }
        for v in 1..=nm {
            factors[v - 1] = loads[v] + 1;
        }
        total += product_of(&factors);
    });
    total
}

/// Counts `i(0), ..., i(tmax)`, computed concurrently per dilation.
pub fn lattice_point_counts(dag: &ExtendedDag, tmax: u64) -> Vec<BigInt> {
    let ts: Vec<u64> = (0..=tmax).collect();
    parallel_map(&ts, |&t| count_lattice_points(dag, t))
}

/// Every integer flow of value `t`, materialized. Exponential in `t`; meant
/// for the small dilations used in verification.
pub fn enumerate_flows(dag: &ExtendedDag, t: u64) -> Vec<FlowPoint> {
    let h = dag.base();
    let n = h.n();
    let nm = h.vertex_count();
    let mut out = Vec::new();
    for_each_composition(t, h.edge_count(), &mut |b| {
        let mut loads = vec![0u64; nm + 1];
        for (pos, &(i, j)) in h.edges().iter().enumerate() {
            loads[i] += b[pos];
            loads[j] += b[pos];
        }
        // split every vertex load over its two parallel edges
        let splits: Vec<u64> = (1..=nm).map(|v| loads[v]).collect();
        let mut choice = vec![0u64; nm];
        fn rec(splits: &[u64], k: usize, choice: &mut Vec<u64>, emit: &mut impl FnMut(&[u64])) {
            if k == splits.len() {
                emit(choice);
                return;
            }
            for first in 0..=splits[k] {
                choice[k] = first;
                rec(splits, k + 1, choice, emit);
            }
        }
        rec(&splits, 0, &mut choice, &mut |choice| {
            let mut values = vec![0u64; 2 * nm + b.len()];
            for i in 1..=n {
                values[2 * (i - 1)] = choice[i - 1];
                values[2 * (i - 1) + 1] = loads[i] - choice[i - 1];
            }
            for (pos, &load) in b.iter().enumerate() {
                values[2 * n + pos] = load;
            }
            let gamma_base = 2 * n + b.len();
            for j in n + 1..=nm {
                values[gamma_base + 2 * (j - n - 1)] = choice[j - 1];
                values[gamma_base + 2 * (j - n - 1) + 1] = loads[j] - choice[j - 1];
            }
            out.push(FlowPoint::new(values, t));
        });
    });
    out
}

/// Lattice point count by direct enumeration of flows; the independent
/// cross-check for the product formula at small `t`.
pub fn count_lattice_points_naive(dag: &ExtendedDag, t: u64) -> BigInt {
    BigInt::from(enumerate_flows(dag, t).len())
}

/// Interpolate the values `values[k] = p(k)`, `k = 0..values.len()`, as an
/// exact rational polynomial (coefficients lowest first).
#[allow(clippy::needless_range_loop)]
pub fn interpolate_at_integers(values: &[BigInt]) -> Vec<BigRational> {
    let n = values.len();
    assert!(n > 0);
    // master(x) = prod_{j<n} (x - j), multiplied in one factor at a time
    let mut master = vec![BigInt::zero(); n + 1];
    master[0] = BigInt::one();
    for j in 0..n {
        master[j + 1] = master[j].clone();
        for c in (1..=j).rev() {
            let lower = master[c - 1].clone();
            master[c] = lower - BigInt::from(j) * &master[c];
        }
        master[0] = -BigInt::from(j) * &master[0];
    }
    let mut coeffs = vec![BigRational::zero(); n];
    for k in 0..n {
        // quotient master(x) / (x - k) by synthetic division
        let mut q = vec![BigInt::zero(); n];
        q[n - 1] = master[n].clone();
        for c in (1..n).rev() {
            q[c - 1] = &master[c] + BigInt::from(k) * &q[c];
        }
        // denominator prod_{j != k} (k - j) = (-1)^(n-1-k) k! (n-1-k)!
        let mut denom = BigInt::one();
        for j in 0..n {
            if j != k {
                denom *= BigInt::from(k as i64 - j as i64);
            }
        }
        let scale = BigRational::new(values[k].clone(), denom);
        for c in 0..n {
            coeffs[c] += &scale * BigRational::from_integer(q[c].clone());
        }
    }
    coeffs
}

/// Evaluate a rational-coefficient polynomial at an integer.
pub fn eval_rational_poly(coeffs: &[BigRational], x: &BigInt) -> BigRational {
    let xr = BigRational::from_integer(x.clone());
    let mut acc = BigRational::zero();
    for c in coeffs.iter().rev() {
        acc = acc * &xr + c;
    }
    acc
}

/// The Ehrhart polynomial of the flow polytope: the degree-d interpolation
/// through the counts at `t = 0..=d`, with exact rational coefficients.
pub fn ehrhart_polynomial(dag: &ExtendedDag) -> Vec<BigRational> {
    let counts = lattice_point_counts(dag, dag.dimension() as u64);
    interpolate_at_integers(&counts)
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for x in 0..k.min(n - k) {
        acc = acc * BigInt::from(n - x) / BigInt::from(x + 1);
    }
    acc
}

/// The h*-polynomial from lattice point counts:
/// `h*_j = sum_k (-1)^k C(d+1, k) i(j - k)`.
///
/// A negative coefficient is impossible for correct counts and surfaces as
/// an internal-inconsistency error.
pub fn hstar_via_ehrhart(dag: &ExtendedDag) -> Result<Polynomial, EhrhartError> {
    let d = dag.dimension();
    let counts = lattice_point_counts(dag, d as u64);
    hstar_from_counts(&counts, d)
}

pub(crate) fn hstar_from_counts(counts: &[BigInt], d: usize) -> Result<Polynomial, EhrhartError> {
    let mut coeffs = Vec::with_capacity(d + 1);
    for j in 0..=d {
        let mut c = BigInt::zero();
        for k in 0..=j {
            let term = binomial(d + 1, k) * &counts[j - k];
            if k % 2 == 0 {
                c += term;
            } else {
                c -= term;
            }
        }
        if c.is_negative() {
            return Err(EhrhartError::BadHstarCoefficient {
                index: j,
                value: c.to_string(),
            });
        }
        coeffs.push(c);
    }
    Ok(Polynomial::new(coeffs))
}

/// The h*-polynomial from the framing lattice: coefficient `k` counts the
/// clique vectors covered by exactly `k` cliques.
pub fn hstar_via_covers(h: &BipartiteGraph) -> Result<Polynomial, EhrhartError> {
    let mut counts: Vec<BigInt> = Vec::new();
    for a in enumerate_clique_vectors(h) {
        let k = cover_count(h, &a)?;
        if k >= counts.len() {
            counts.resize(k + 1, BigInt::zero());
        }
        counts[k] += 1;
    }
    Ok(Polynomial::new(counts))
}

/// Unimodularity certificate for a simplex given by its vertices: the
/// difference vectors must span a direct summand of the integer lattice
/// (all Smith invariant factors 1). Returns the rank.
pub fn simplex_unimodular_rank(vertices: &[Vec<i64>]) -> Result<usize, EhrhartError> {
    assert!(!vertices.is_empty());
    let base = &vertices[0];
    let diffs: Vec<Vec<BigInt>> = vertices[1..]
        .iter()
        .map(|v| {
            v.iter()
                .zip(base)
                .map(|(&a, &b)| BigInt::from(a - b))
                .collect()
        })
        .collect();
    let expected = vertices.len() - 1;
    if expected == 0 {
        return Ok(0);
    }
    let factors = smith_normal_form(diffs);
    if factors.len() != expected {
        return Err(EhrhartError::RankDeficient {
            rank: factors.len(),
            expected,
        });
    }
    if let Some(bad) = factors.iter().find(|f| !f.is_one()) {
        return Err(EhrhartError::NotUnimodular(bad.to_string()));
    }
    Ok(expected)
}

/// Check that a maximal clique's simplex is unimodular; returns its rank,
/// which must be the polytope dimension.
pub fn unimodularity_check(dag: &ExtendedDag, clique: &Clique) -> Result<usize, EhrhartError> {
    let vertices: Vec<Vec<i64>> = clique
        .routes()
        .iter()
        .map(|r| r.indicator_vector(dag).iter().map(|&x| x as i64).collect())
        .collect();
    let rank = simplex_unimodular_rank(&vertices)?;
    if rank != dag.dimension() {
        return Err(EhrhartError::RankDeficient {
            rank,
            expected: dag.dimension(),
        });
    }
    Ok(rank)
}

/// Assembled Ehrhart data: counts through `d+1`, the interpolated
/// polynomial, the h*-polynomial, and the normalized volume.
#[derive(Debug, Clone)]
pub struct EhrhartData {
    /// `i(0), ..., i(d+1)`; the final entry is the out-of-sample node.
    pub counts: Vec<BigInt>,
    /// Exact rational coefficients, lowest degree first.
    pub polynomial: Vec<BigRational>,
    pub hstar: Polynomial,
    /// Normalized volume `sum_j h*_j`.
    pub volume: BigInt,
}

pub fn ehrhart_data(dag: &ExtendedDag) -> Result<EhrhartData, EhrhartError> {
    let d = dag.dimension();
    let counts = lattice_point_counts(dag, d as u64 + 1);
    let polynomial = interpolate_at_integers(&counts[..=d]);
    let hstar = hstar_from_counts(&counts[..=d], d)?;
    let volume = hstar.coefficient_sum();
    Ok(EhrhartData {
        counts,
        polynomial,
        hstar,
        volume,
    })
}

impl EhrhartData {
    /// `d! * leading coefficient`, which must equal the volume.
    pub fn volume_from_leading_coefficient(&self) -> Option<BigInt> {
        let mut fact = BigInt::one();
        for k in 1..self.polynomial.len() {
            fact *= BigInt::from(k);
        }
        let lead = self.polynomial.last()?;
        let scaled = lead * BigRational::from_integer(fact);
        scaled.is_integer().then(|| scaled.to_integer())
    }

    /// Whether the interpolation reproduces the held-out count at `t = d+1`.
    pub fn out_of_sample_ok(&self) -> bool {
        let t = BigInt::from(self.polynomial.len());
        let predicted = eval_rational_poly(&self.polynomial, &t);
        predicted.is_integer() && predicted.to_integer() == *self.counts.last().expect("counts")
    }
}
