//! Flow polytopes of bipartite graph extensions.
//!
//! Given a connected bipartite graph `H` with minimum degree two, this crate
//! constructs the extension DAG `G(H)` and the almost-degree-whiskered graph
//! `W(H)`, enumerates the framed triangulation of the unit flow polytope of
//! `G(H)` through three independent pipelines (clique vectors, a maximal
//! clique search over the coherence graph, and matchings of `W(H)`), and
//! computes the Ehrhart h*-polynomial both from the cover statistic of the
//! framing lattice and from exact lattice point counting. The pipelines are
//! cross-verified against one another down to exact integer equality.

#![forbid(unsafe_code)]

pub mod cli;
pub mod cliques;
pub mod corpus;
pub mod ehrhart;
pub mod graph;
pub mod halfopen;
pub mod lattice;
pub mod linalg;
pub mod matchings;
pub mod poly;
pub mod rng;
pub mod routes;
pub mod verify;
pub mod workers;

pub use cliques::{
    enumerate_clique_vectors, enumerate_maximal_cliques_oracle, phi, phi_inverse, Clique,
    CliqueVector, Sign,
};
pub use graph::{
    extend, whisker, BipartiteGraph, DagEdge, ExtendedDag, SimpleGraph, WhiskeredGraph,
};
pub use halfopen::{
    coherent_decomposition, half_open_locate, half_open_partition_check, HalfOpenMembership,
};
pub use lattice::{build_lattice, cover_count, covers, covers_oracle, upper_covers, LatticeReport};
pub use matchings::{enumerate_matchings, matching_polynomial, psi, psi_inverse, Matching, WEdge};
pub use poly::Polynomial;
pub use routes::{conflict, cw_cmp, enumerate_routes, CoherenceGraph, ConflictKind, Route};
pub use verify::{verify_all, VerificationReport};
