//! Cross-verification of every pipeline on one instance: the clique-vector,
//! clique-search, and matching enumerations must agree as sets, the two
//! h*-pipelines must agree with the matching polynomial coefficientwise, all
//! cliques must be unimodular, and the half-open decomposition must
//! partition the small dilates. Each named check reports pass or fail with
//! a witness; failures are collected, never dropped.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::cliques::{
    enumerate_clique_vectors, enumerate_maximal_cliques_oracle, phi, phi_inverse, Clique,
    CliqueVector,
};
use crate::ehrhart::{
    count_lattice_points_naive, ehrhart_data, eval_rational_poly, hstar_via_covers,
    unimodularity_check, EhrhartData,
};
use crate::graph::{extend, whisker, BipartiteGraph};
use crate::halfopen::half_open_partition_check;
use crate::lattice::{build_lattice, cover_count, covers, covers_oracle};
use crate::matchings::{enumerate_matchings, matching_polynomial, psi, psi_inverse, Matching};
use crate::poly::{bigint_json, Polynomial};
use crate::routes::{cw_cmp, enumerate_routes, Orientation, Route};
use crate::workers::parallel_map;

/// Outcome of every named check plus the headline data of one instance.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub instance: String,
    pub counts: BTreeMap<String, BigInt>,
    pub hstar_covers: Polynomial,
    pub hstar_ehrhart: Polynomial,
    pub matching_poly: Polynomial,
    pub volume: BigInt,
    /// Check name -> `None` for pass, `Some(witness)` for fail.
    pub checks: BTreeMap<String, Option<String>>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.values().all(Option::is_none)
    }

    pub fn failures(&self) -> Vec<(&str, &str)> {
        self.checks
            .iter()
            .filter_map(|(name, out)| out.as_deref().map(|msg| (name.as_str(), msg)))
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let checks: BTreeMap<&str, &str> = self
            .checks
            .iter()
            .map(|(name, out)| (name.as_str(), if out.is_none() { "pass" } else { "fail" }))
            .collect();
        let failures: BTreeMap<&str, &str> = self.failures().into_iter().collect();
        let mut doc = json!({
            "instance": self.instance,
            "counts": self.counts.iter().map(|(k, v)| (k.clone(), bigint_json(v))).collect::<BTreeMap<_, _>>(),
            "hstar_covers": self.hstar_covers.to_json()["coeffs"],
            "hstar_ehrhart": self.hstar_ehrhart.to_json()["coeffs"],
            "matching_poly": self.matching_poly.to_json()["coeffs"],
            "volume": bigint_json(&self.volume),
            "checks": checks,
        });
        if !failures.is_empty() {
            doc["failures"] = json!(failures);
        }
        doc
    }

    /// One line per check, sorted by name: `PASS name` or `FAIL name: witness`.
    pub fn render_lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|(name, out)| match out {
                None => format!("PASS {name}"),
                Some(msg) => format!("FAIL {name}: {msg}"),
            })
            .collect()
    }
}

fn fail(msg: impl Into<String>) -> Option<String> {
    Some(msg.into())
}

/// Run every check on one instance. `seed` and `chain_samples` control the
/// sampled chain-hypothesis verification; everything else is exhaustive.
pub fn verify_all(
    instance: &str,
    h: &BipartiteGraph,
    seed: u64,
    chain_samples: usize,
) -> VerificationReport {
    let dag = extend(h);
    let w = whisker(h);
    let d = dag.dimension();

    let vectors = enumerate_clique_vectors(h);
    let image: Vec<Clique> = vectors
        .iter()
        .map(|a| phi(h, a).expect("enumerated vectors are valid"))
        .collect();
    let oracle = enumerate_maximal_cliques_oracle(&dag);
    let all_matchings = enumerate_matchings(&w);
    let mu = matching_polynomial(&w);
    let ehr: Result<EhrhartData, _> = ehrhart_data(&dag);
    let hstar_cov = hstar_via_covers(h);

    let mut checks: BTreeMap<String, Option<String>> = BTreeMap::new();

    // phi is a bijection onto the oracle clique set
    checks.insert("phi_bijection".into(), {
        let mut sorted = image.clone();
        sorted.sort_unstable();
        let distinct = sorted.windows(2).all(|w| w[0] != w[1]);
        if !distinct {
            fail("phi is not injective")
        } else if sorted != oracle {
            fail(format!(
                "phi image has {} cliques, clique search found {}",
                sorted.len(),
                oracle.len()
            ))
        } else {
            vectors
                .iter()
                .zip(&image)
                .find_map(|(a, c)| match phi_inverse(h, c) {
                    Ok(back) if &back == a => None,
                    Ok(back) => fail(format!("round trip of {a} produced {back}")),
                    Err(e) => fail(format!("round trip of {a} failed: {e}")),
                })
        }
    });

    // psi is a bijection onto the matchings of W(H)
    checks.insert("psi_bijection".into(), {
        let psi_image: Result<Vec<Matching>, _> = vectors.iter().map(|a| psi(h, a)).collect();
        match psi_image {
            Err(e) => fail(format!("psi failed: {e}")),
            Ok(mut psi_image) => {
                let before = psi_image.len();
                psi_image.sort_unstable();
                psi_image.dedup();
                let mut all = all_matchings.clone();
                all.sort_unstable();
                if psi_image.len() != before {
                    fail("psi is not injective")
                } else if psi_image != all {
                    fail(format!(
                        "psi image has {} matchings, enumeration found {}",
                        psi_image.len(),
                        all.len()
                    ))
                } else {
                    vectors.iter().find_map(|a| {
                        let m = psi(h, a).expect("validated");
                        match psi_inverse(h, &m) {
                            Ok(back) if &back == a => None,
                            Ok(back) => fail(format!("round trip of {a} produced {back}")),
                            Err(e) => fail(format!("round trip of {a} failed: {e}")),
                        }
                    })
                }
            }
        }
    });

    // the headline counts all agree
    let volume = ehr.as_ref().map(|e| e.volume.clone()).unwrap_or_default();
    checks.insert("counts_agree".into(), {
        match &ehr {
            Err(e) => fail(format!("ehrhart data failed: {e}")),
            Ok(data) => {
                let from_leading = data.volume_from_leading_coefficient();
                let candidates = [
                    ("maximal cliques", BigInt::from(oracle.len())),
                    ("clique vectors", BigInt::from(vectors.len())),
                    ("matchings", BigInt::from(all_matchings.len())),
                    ("h* sum", data.volume.clone()),
                ];
                if let Some((name, value)) = candidates.iter().find(|(_, v)| *v != data.volume) {
                    fail(format!("{name} = {value} but volume = {}", data.volume))
                } else if from_leading.as_ref() != Some(&data.volume) {
                    fail(format!(
                        "d! x leading coefficient = {from_leading:?} but h* sum = {}",
                        data.volume
                    ))
                } else {
                    None
                }
            }
        }
    });

    // both h* pipelines equal the matching polynomial
    checks.insert("hstar_pipelines_equal".into(), {
        match (&ehr, &hstar_cov) {
            (Err(e), _) => fail(format!("counting pipeline failed: {e}")),
            (_, Err(e)) => fail(format!("cover pipeline failed: {e}")),
            (Ok(data), Ok(cov)) => {
                if data.hstar != mu {
                    fail(format!(
                        "hstar from counts {} != matching poly {}",
                        data.hstar, mu
                    ))
                } else if cov != &mu {
                    fail(format!("hstar from covers {cov} != matching poly {mu}"))
                } else {
                    None
                }
            }
        }
    });

    // h* has the shape real-rootedness forces
    checks.insert("hstar_shape".into(), {
        if mu.coeff(0) != BigInt::from(1) {
            fail("constant coefficient is not 1")
        } else if !mu.all_nonnegative() {
            fail("negative coefficient")
        } else if !mu.is_log_concave() {
            fail("coefficients are not log-concave")
        } else if !mu.is_unimodal() {
            fail("coefficients are not unimodal")
        } else {
            None
        }
    });

    // every maximal clique is a unimodular simplex of full rank
    checks.insert("cliques_unimodular".into(), {
        let results = parallel_map(&oracle, |c| unimodularity_check(&dag, c));
        results.iter().zip(&oracle).find_map(|(res, c)| match res {
            Ok(rank) if *rank == d => None,
            Ok(rank) => fail(format!("rank {rank} != dimension {d}")),
            Err(e) => fail(format!("clique {} fails: {e}", c.to_json())),
        })
    });

    // the cover characterization matches the single-rotation oracle on all
    // ordered pairs: compare the full set of characterized covers with the
    // oriented shared-facet adjacencies
    checks.insert("cover_characterization_matches_rotation".into(), {
        cover_agreement(h, &vectors, &image)
    });

    // every adjacent clique pair is oriented exactly one way
    checks.insert("dual_graph_oriented_once".into(), {
        adjacency_orientation(&image)
    });

    // the number of covers equals the matching size, vector by vector
    checks.insert("cover_counts_match_matchings".into(), {
        vectors.iter().find_map(|a| match cover_count(h, a) {
            Ok(k) => {
                let edges = psi(h, a).expect("validated").len();
                (k != edges).then(|| format!("{a}: {k} covers vs {edges} matching edges"))
            }
            Err(e) => fail(format!("{a}: {e}")),
        })
    });

    // lattice structure: acyclic cover digraph, unique extremes, histogram
    checks.insert("lattice_structure".into(), {
        match build_lattice(h, seed, chain_samples) {
            Err(e) => fail(format!("lattice construction failed: {e}")),
            Ok(report) => {
                let histogram: Vec<BigInt> = report
                    .cover_count_histogram
                    .iter()
                    .map(|&c| BigInt::from(c))
                    .collect();
                let expected: Vec<BigInt> = (0..=mu.degree()).map(|k| mu.coeff(k)).collect();
                if !report.acyclic {
                    fail("cover digraph has a cycle")
                } else if !report.unique_maximum || !report.unique_minimum {
                    fail("extremes are not unique")
                } else if histogram != expected {
                    fail(format!(
                        "cover histogram {histogram:?} != matching sizes {expected:?}"
                    ))
                } else if report.chain_failures > 0 {
                    fail(format!(
                        "{} of {} sampled faces violate the chain hypothesis",
                        report.chain_failures, report.chain_samples
                    ))
                } else {
                    None
                }
            }
        }
    });

    // interpolation reproduces the held-out count at t = d+1
    checks.insert("ehrhart_out_of_sample".into(), {
        match &ehr {
            Err(e) => fail(format!("{e}")),
            Ok(data) => {
                let t = BigInt::from(d as u64 + 1);
                let predicted = eval_rational_poly(&data.polynomial, &t);
                let actual = data.counts.last().expect("counts");
                if predicted.is_integer() && &predicted.to_integer() == actual {
                    None
                } else {
                    fail(format!(
                        "interpolation gives {predicted} at t={t}, count is {actual}"
                    ))
                }
            }
        }
    });

    // product-formula counting cross-checked by direct flow enumeration
    checks.insert("naive_count_cross_check".into(), {
        match &ehr {
            Err(e) => fail(format!("{e}")),
            Ok(data) => (0..=2u64).find_map(|t| {
                let direct = count_lattice_points_naive(&dag, t);
                (direct != data.counts[t as usize]).then(|| {
                    format!(
                        "t={t}: direct {direct} vs product {}",
                        data.counts[t as usize]
                    )
                })
            }),
        }
    });

    // half-open partition at t = 1 and t = 2
    let mut partition_points: BTreeMap<String, BigInt> = BTreeMap::new();
    for t in [1u64, 2] {
        checks.insert(format!("half_open_partition_t{t}"), {
            match half_open_partition_check(h, t) {
                Err(e) => fail(format!("{e}")),
                Ok(report) => {
                    partition_points.insert(
                        format!("lattice_points_t{t}"),
                        BigInt::from(report.lattice_points),
                    );
                    if !report.ok() {
                        fail(format!(
                            "{} of {} points misowned: {}",
                            report.violations.len(),
                            report.lattice_points,
                            report.violations.first().cloned().unwrap_or_default()
                        ))
                    } else {
                        match &ehr {
                            Ok(data)
                                if BigInt::from(report.uniquely_owned)
                                    == data.counts[t as usize] =>
                            {
                                None
                            }
                            Ok(data) => fail(format!(
                                "{} owners vs i({t}) = {}",
                                report.uniquely_owned, data.counts[t as usize]
                            )),
                            Err(e) => fail(format!("{e}")),
                        }
                    }
                }
            }
        });
    }

    let mut counts: BTreeMap<String, BigInt> = BTreeMap::new();
    counts.insert("routes".into(), BigInt::from(enumerate_routes(&dag).len()));
    counts.insert("dag_edges".into(), BigInt::from(dag.edge_count()));
    counts.insert("dimension".into(), BigInt::from(d));
    counts.insert("clique_vectors".into(), BigInt::from(vectors.len()));
    counts.insert("maximal_cliques".into(), BigInt::from(oracle.len()));
    counts.insert("matchings".into(), BigInt::from(all_matchings.len()));
    counts.append(&mut partition_points);

    VerificationReport {
        instance: instance.to_string(),
        counts,
        hstar_covers: hstar_cov.unwrap_or_else(|_| Polynomial::zero()),
        hstar_ehrhart: ehr
            .as_ref()
            .map(|e| e.hstar.clone())
            .unwrap_or_else(|_| Polynomial::zero()),
        matching_poly: mu,
        volume,
        checks,
    }
}

/// Compare the characterized cover pairs against the oriented shared-facet
/// adjacencies of the clique set, as full ordered-pair sets.
fn cover_agreement(
    h: &BipartiteGraph,
    vectors: &[CliqueVector],
    image: &[Clique],
) -> Option<String> {
    let mut characterized: Vec<(usize, usize)> = Vec::new();
    for (p, a) in vectors.iter().enumerate() {
        for (q, b) in vectors.iter().enumerate() {
            match covers(h, a, b) {
                Ok(Some(_)) => characterized.push((p, q)),
                Ok(None) => {}
                Err(e) => return fail(format!("covers({a}, {b}) errored: {e}")),
            }
        }
    }
    let mut oriented: Vec<(usize, usize)> = Vec::new();
    for (facet_pair, msg) in adjacent_pairs(image) {
        if let Some(msg) = msg {
            return fail(msg);
        }
        let (p, q, r_p, r_q) = facet_pair;
        match cw_cmp(&r_p, &r_q) {
            Ok(Orientation::FirstCwOfSecond) => oriented.push((p, q)),
            Ok(Orientation::SecondCwOfFirst) => oriented.push((q, p)),
            Err(e) => return fail(format!("adjacent pair is coherent: {e}")),
        }
    }
    characterized.sort_unstable();
    oriented.sort_unstable();
    if characterized != oriented {
        let only_char: Vec<_> = characterized
            .iter()
            .filter(|p| oriented.binary_search(p).is_err())
            .take(3)
            .collect();
        let only_rot: Vec<_> = oriented
            .iter()
            .filter(|p| characterized.binary_search(p).is_err())
            .take(3)
            .collect();
        return fail(format!(
            "{} characterized vs {} rotation covers; extra {only_char:?} / missing {only_rot:?}",
            characterized.len(),
            oriented.len()
        ));
    }
    None
}

type AdjacentPair = ((usize, usize, Route, Route), Option<String>);

/// All unordered clique pairs sharing a facet, with the two departing
/// routes; flags facets shared by more than two cliques.
fn adjacent_pairs(image: &[Clique]) -> Vec<AdjacentPair> {
    let mut facets: HashMap<Vec<Route>, Vec<(usize, Route)>> = HashMap::new();
    for (q, c) in image.iter().enumerate() {
        for k in 0..c.len() {
            let mut facet = c.routes().to_vec();
            let removed = facet.remove(k);
            facets.entry(facet).or_default().push((q, removed));
        }
    }
    let mut out = Vec::new();
    for owners in facets.into_values() {
        match owners.as_slice() {
            [_] => {}
            [(p, r_p), (q, r_q)] => out.push(((*p, *q, *r_p, *r_q), None)),
            many => out.push((
                (0, 0, many[0].1, many[0].1),
                Some(format!("a facet is shared by {} cliques", many.len())),
            )),
        }
    }
    out
}

/// Every shared-facet pair must be comparable in exactly one direction under
/// the rotation oracle.
fn adjacency_orientation(image: &[Clique]) -> Option<String> {
    for (pair, msg) in adjacent_pairs(image) {
        if let Some(msg) = msg {
            return fail(msg);
        }
        let (p, q, _, _) = pair;
        let forward = covers_oracle(&image[p], &image[q]);
        let backward = covers_oracle(&image[q], &image[p]);
        if forward == backward {
            return fail(format!(
                "adjacent cliques {p} and {q} oriented {} ways",
                if forward { "both" } else { "zero" }
            ));
        }
    }
    None
}
