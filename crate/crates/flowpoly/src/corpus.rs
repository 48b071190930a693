//! Built-in instance family used by the `corpus` command and the test suite:
//! the complete bipartite graphs `K_{p,q}` for `2 <= p, q <= 3`, the even
//! cycles `C_6` and `C_8`, and `K_{3,3}` minus a perfect matching.

use crate::graph::BipartiteGraph;

/// A named corpus instance.
pub struct CorpusInstance {
    pub name: &'static str,
    pub graph: BipartiteGraph,
}

fn complete(p: usize, q: usize) -> BipartiteGraph {
    let mut edges = Vec::new();
    for i in 1..=p {
        for j in p + 1..=p + q {
            edges.push((i, j));
        }
    }
    BipartiteGraph::new(p, q, &edges).expect("complete bipartite graphs are valid")
}

pub fn k22() -> BipartiteGraph {
    complete(2, 2)
}

pub fn k23() -> BipartiteGraph {
    complete(2, 3)
}

pub fn k32() -> BipartiteGraph {
    complete(3, 2)
}

pub fn k33() -> BipartiteGraph {
    complete(3, 3)
}

/// `C_6` as a bipartite graph: the cycle 1-4-2-5-3-6-1.
pub fn c6() -> BipartiteGraph {
    BipartiteGraph::new(3, 3, &[(1, 4), (2, 4), (2, 5), (3, 5), (3, 6), (1, 6)])
        .expect("C_6 is valid")
}

/// `C_8` as a bipartite graph: the cycle 1-5-2-6-3-7-4-8-1.
pub fn c8() -> BipartiteGraph {
    BipartiteGraph::new(
        4,
        4,
        &[
            (1, 5),
            (2, 5),
            (2, 6),
            (3, 6),
            (3, 7),
            (4, 7),
            (4, 8),
            (1, 8),
        ],
    )
    .expect("C_8 is valid")
}

/// `K_{3,3}` minus the perfect matching {14, 25, 36}.
pub fn k33_minus_pm() -> BipartiteGraph {
    BipartiteGraph::new(3, 3, &[(1, 5), (1, 6), (2, 4), (2, 6), (3, 4), (3, 5)])
        .expect("K_{3,3} minus a perfect matching is valid")
}

/// All corpus instances in a fixed order.
pub fn all() -> Vec<CorpusInstance> {
    vec![
        CorpusInstance {
            name: "K_{2,2}",
            graph: k22(),
        },
        CorpusInstance {
            name: "K_{2,3}",
            graph: k23(),
        },
        CorpusInstance {
            name: "K_{3,2}",
            graph: k32(),
        },
        CorpusInstance {
            name: "K_{3,3}",
            graph: k33(),
        },
        CorpusInstance {
            name: "C_6",
            graph: c6(),
        },
        CorpusInstance {
            name: "C_8",
            graph: c8(),
        },
        CorpusInstance {
            name: "K_{3,3}-PM",
            graph: k33_minus_pm(),
        },
    ]
}

/// Look up a corpus instance by name (`k22`, `k23`, `k32`, `k33`, `c6`, `c8`,
/// `k33-pm`).
pub fn by_name(name: &str) -> Option<BipartiteGraph> {
    match name.to_ascii_lowercase().as_str() {
        "k22" | "k_{2,2}" => Some(k22()),
        "k23" | "k_{2,3}" => Some(k23()),
        "k32" | "k_{3,2}" => Some(k32()),
        "k33" | "k_{3,3}" => Some(k33()),
        "c6" | "c_6" => Some(c6()),
        "c8" | "c_8" => Some(c8()),
        "k33-pm" | "k_{3,3}-pm" => Some(k33_minus_pm()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_instances_validate() {
        let instances = all();
        assert_eq!(instances.len(), 7);
        for inst in &instances {
            // every corpus vertex has degree >= 2 by construction
            for v in 1..=inst.graph.vertex_count() {
                assert!(inst.graph.degree(v) >= 2, "{} vertex {v}", inst.name);
            }
        }
    }

    #[test]
    fn cycles_have_all_degrees_two() {
        for g in [c6(), c8(), k33_minus_pm()] {
            for v in 1..=g.vertex_count() {
                assert_eq!(g.degree(v), 2);
            }
        }
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(by_name("k32"), Some(k32()));
        assert_eq!(by_name("C8"), Some(c8()));
        assert_eq!(by_name("nope"), None);
    }
}
