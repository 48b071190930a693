//! Command-line front end: construction, enumeration, and verification with
//! text or JSON output.
//!
//! Exit status: 0 on success, 1 on input/validation failure, 2 on
//! verification failure, 64 on usage errors. JSON output is deterministic
//! byte for byte for a fixed input and seed.

use std::fmt::Write as _;
use std::io::Write;

use serde_json::{json, Value};

use crate::cliques::{enumerate_clique_vectors, phi};
use crate::corpus;
use crate::ehrhart::{ehrhart_data, hstar_via_covers, hstar_via_ehrhart, lattice_point_counts};
use crate::graph::{extend, whisker, BipartiteGraph};
use crate::lattice::{build_lattice, lattice_json};
use crate::matchings::{enumerate_matchings, matching_polynomial};
use crate::poly::bigint_json;
use crate::routes::{enumerate_routes, CoherenceGraph};
use crate::verify::verify_all;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_VERIFICATION: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

const DEFAULT_SEED: u64 = 1729;
const CHAIN_SAMPLES: usize = 200;

const USAGE: &str = "usage: flowpoly <command> [options]

commands:
  validate    parse and validate a bipartite graph
  extend      print the extension DAG with its edge ids
  whisker     print the whiskered graph with its leaf labels
  routes      list all routes and the coherence adjacency
  cliques     enumerate clique vectors and their cliques
  matchings   enumerate matchings and the matching polynomial
  lattice     build the cover digraph and report its structure
  hstar       print the h*-polynomial (--method covers|ehrhart)
  ehrhart     print lattice point counts and the Ehrhart polynomial
  verify      run every cross-check on one instance
  corpus      run verify on the built-in instance family

options:
  --graph X   path to a graph document, inline JSON, or a corpus name
              (k22, k23, k32, k33, c6, c8, k33-pm)
  --format F  output format: text (default) or json
  --method M  h* pipeline: covers (default) or ehrhart
  --tmax N    count lattice points up to dilation N (ehrhart)
  --seed N    seed for sampled checks (default 1729)

environment:
  FLOWPOLY_THREADS   cap on worker threads for the verification scans";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

struct Options {
    command: String,
    graph: Option<String>,
    format: Format,
    method: Option<String>,
    tmax: Option<u64>,
    seed: u64,
}

fn parse_args(argv: &[String]) -> Result<Options, String> {
    let mut it = argv.iter();
    let command = it
        .next()
        .ok_or_else(|| "missing command".to_string())?
        .clone();
    let mut opts = Options {
        command,
        graph: None,
        format: Format::Text,
        method: None,
        tmax: None,
        seed: DEFAULT_SEED,
    };
    while let Some(flag) = it.next() {
        let mut value = |name: &str| {
            it.next()
                .cloned()
                .ok_or_else(|| format!("flag {name} needs a value"))
        };
        match flag.as_str() {
            "--graph" => opts.graph = Some(value("--graph")?),
            "--format" => {
                opts.format = match value("--format")?.as_str() {
                    "text" => Format::Text,
                    "json" => Format::Json,
                    other => return Err(format!("unknown format {other:?}")),
                }
            }
            "--method" => {
                let m = value("--method")?;
                if m != "covers" && m != "ehrhart" {
                    return Err(format!("unknown method {m:?}"));
                }
                opts.method = Some(m);
            }
            "--tmax" => {
                opts.tmax = Some(
                    value("--tmax")?
                        .parse()
                        .map_err(|_| "--tmax needs a nonnegative integer".to_string())?,
                )
            }
            "--seed" => {
                opts.seed = value("--seed")?
                    .parse()
                    .map_err(|_| "--seed needs a nonnegative integer".to_string())?
            }
            other => return Err(format!("unknown flag {other:?}")),
        }
    }
    Ok(opts)
}

/// Resolve `--graph`: inline JSON, then a readable file, then a corpus name.
fn load_graph(source: &str) -> Result<BipartiteGraph, String> {
    let trimmed = source.trim();
    if trimmed.starts_with('{') || trimmed.contains('\n') {
        return BipartiteGraph::parse(trimmed).map_err(|e| e.to_string());
    }
    if let Ok(text) = std::fs::read_to_string(trimmed) {
        return BipartiteGraph::parse(&text).map_err(|e| e.to_string());
    }
    if let Some(g) = corpus::by_name(trimmed) {
        return Ok(g);
    }
    Err(format!(
        "cannot read {trimmed:?} as a file and it is not a corpus name"
    ))
}

fn emit(out: &mut impl Write, format: Format, doc: &Value, text: &str) -> std::io::Result<()> {
    match format {
        Format::Json => writeln!(out, "{doc}"),
        Format::Text => writeln!(out, "{}", text.trim_end()),
    }
}

/// Run the CLI on an argument vector, writing to the given sinks; returns
/// the process exit status.
pub fn run(argv: &[String], out: &mut impl Write, err: &mut impl Write) -> u8 {
    let opts = match parse_args(argv) {
        Ok(o) => o,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}\n\n{USAGE}");
            return EXIT_USAGE;
        }
    };
    match dispatch(&opts, out, err) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_VALIDATION
        }
    }
}

fn graph_for(opts: &Options) -> Result<BipartiteGraph, String> {
    let source = opts
        .graph
        .as_deref()
        .ok_or_else(|| format!("command {:?} needs --graph", opts.command))?;
    load_graph(source)
}

fn dispatch(opts: &Options, out: &mut impl Write, err: &mut impl Write) -> Result<u8, String> {
    let io_err = |e: std::io::Error| format!("write failed: {e}");
    match opts.command.as_str() {
        "validate" => {
            let g = graph_for(opts)?;
            let text = format!(
                "valid bipartite graph: n={} m={} edges={}",
                g.n(),
                g.m(),
                g.edge_count()
            );
            emit(out, opts.format, &g.to_json(), &text).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        "extend" => {
            let g = graph_for(opts)?;
            let dag = extend(&g);
            let mut text = format!(
                "extension DAG: {} edges, dimension {}\n",
                dag.edge_count(),
                dag.dimension()
            );
            for e in dag.edge_order() {
                let _ = writeln!(text, "{e}");
            }
            emit(out, opts.format, &dag.to_json(), &text).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        "whisker" => {
            let g = graph_for(opts)?;
            let w = whisker(&g);
            let mut text = format!(
                "whiskered graph: {} vertices, {} edges\nleaves:\n",
                w.vertex_count(),
                w.edge_count()
            );
            for &(v, u) in w.leaves() {
                let _ = writeln!(text, "{}", crate::graph::WhiskeredGraph::leaf_label(v, u));
            }
            emit(out, opts.format, &w.to_json(), &text).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        "routes" => {
            let g = graph_for(opts)?;
            let dag = extend(&g);
            let routes = enumerate_routes(&dag);
            let cg = CoherenceGraph::new(&dag);
            let doc = json!({
                "route_count": routes.len(),
                "routes": routes.iter().map(|r| r.token()).collect::<Vec<_>>(),
                "coherence": cg.to_json(),
            });
            let mut text = String::new();
            for r in &routes {
                let _ = writeln!(text, "{r}");
            }
            emit(out, opts.format, &doc, &text).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        "cliques" => {
            let g = graph_for(opts)?;
            let vectors = enumerate_clique_vectors(&g);
            let cliques: Result<Vec<_>, _> = vectors.iter().map(|a| phi(&g, a)).collect();
            let cliques = cliques.map_err(|e| e.to_string())?;
            let doc = json!({
                "count": vectors.len(),
                "vectors": vectors.iter().map(|a| a.to_json(&g)).collect::<Vec<_>>(),
                "cliques": cliques.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            });
            let mut text = format!("{} maximal cliques\n", vectors.len());
            for (a, c) in vectors.iter().zip(&cliques) {
                let tokens: Vec<String> = c.routes().iter().map(|r| r.token()).collect();
                let _ = writeln!(text, "{a}  {{{}}}", tokens.join(", "));
            }
            emit(out, opts.format, &doc, &text).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        "matchings" => {
            let g = graph_for(opts)?;
            let w = whisker(&g);
            let all = enumerate_matchings(&w);
            let mu = matching_polynomial(&w);
            let doc = json!({
                "count": all.len(),
                "polynomial": mu.to_json(),
                "matchings": all.iter().map(|m| m.to_json()).collect::<Vec<_>>(),
            });
            let mut text = format!("{} matchings, mu = {}\n", all.len(), mu);
            for m in &all {
                let tokens: Vec<String> = m.edges().map(|e| e.token()).collect();
                let _ = writeln!(text, "{{{}}}", tokens.join(", "));
            }
            emit(out, opts.format, &doc, &text).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        "lattice" => {
            let g = graph_for(opts)?;
            let report = build_lattice(&g, opts.seed, CHAIN_SAMPLES).map_err(|e| e.to_string())?;
            let doc = lattice_json(&g, &report).map_err(|e| e.to_string())?;
            let text = format!(
                "framing lattice: {} nodes, {} cover edges\nacyclic: {}\nunique maximum: {}\nunique minimum: {}\ncover-count histogram: {:?}\nchain hypothesis: {}/{} sampled faces ok",
                report.node_count,
                report.cover_edge_count,
                report.acyclic,
                report.unique_maximum,
                report.unique_minimum,
                report.cover_count_histogram,
                report.chain_samples - report.chain_failures,
                report.chain_samples,
            );
            emit(out, opts.format, &doc, &text).map_err(io_err)?;
            if report.all_pass() {
                Ok(EXIT_OK)
            } else {
                let _ = writeln!(err, "error: lattice structure check failed");
                Ok(EXIT_VERIFICATION)
            }
        }
        "hstar" => {
            let g = graph_for(opts)?;
            let method = opts.method.as_deref().unwrap_or("covers");
            let hstar = match method {
                "covers" => hstar_via_covers(&g),
                _ => hstar_via_ehrhart(&extend(&g)),
            }
            .map_err(|e| e.to_string())?;
            let doc = json!({
                "method": method,
                "hstar": hstar.to_json(),
            });
            let text = format!("h* = {hstar}");
            emit(out, opts.format, &doc, &text).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        "ehrhart" => {
            let g = graph_for(opts)?;
            let dag = extend(&g);
            let data = ehrhart_data(&dag).map_err(|e| e.to_string())?;
            let tmax = opts.tmax.unwrap_or(dag.dimension() as u64 + 1);
            let counts = lattice_point_counts(&dag, tmax);
            let rationals: Vec<String> = data.polynomial.iter().map(|c| c.to_string()).collect();
            let doc = json!({
                "dimension": dag.dimension(),
                "counts": counts.iter().map(bigint_json).collect::<Vec<_>>(),
                "polynomial": rationals,
                "hstar": data.hstar.to_json(),
                "volume": bigint_json(&data.volume),
            });
            let mut text = format!(
                "dimension {}, volume {}\nh* = {}\nEhrhart coefficients: [{}]\ncounts:\n",
                dag.dimension(),
                data.volume,
                data.hstar,
                rationals.join(", "),
            );
            for (t, c) in counts.iter().enumerate() {
                let _ = writeln!(text, "i({t}) = {c}");
            }
            emit(out, opts.format, &doc, &text).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        "verify" => {
            let g = graph_for(opts)?;
            let name = opts.graph.clone().unwrap_or_default();
            let report = verify_all(&name, &g, opts.seed, CHAIN_SAMPLES);
            let mut text = String::new();
            for line in report.render_lines() {
                let _ = writeln!(text, "{line}");
            }
            let _ = writeln!(
                text,
                "volume {} | h* {} | {}",
                report.volume,
                report.matching_poly,
                if report.all_pass() {
                    "ALL CHECKS PASS"
                } else {
                    "CHECKS FAILED"
                }
            );
            emit(out, opts.format, &report.to_json(), &text).map_err(io_err)?;
            Ok(if report.all_pass() {
                EXIT_OK
            } else {
                EXIT_VERIFICATION
            })
        }
        "corpus" => {
            let mut docs = Vec::new();
            let mut all_ok = true;
            let mut text = String::new();
            for inst in corpus::all() {
                let report = verify_all(inst.name, &inst.graph, opts.seed, CHAIN_SAMPLES);
                all_ok &= report.all_pass();
                let _ = writeln!(
                    text,
                    "{}: {} (volume {}, h* {})",
                    inst.name,
                    if report.all_pass() { "pass" } else { "FAIL" },
                    report.volume,
                    report.matching_poly,
                );
                for (name, msg) in report.failures() {
                    let _ = writeln!(text, "  FAIL {name}: {msg}");
                }
                docs.push(report.to_json());
            }
            let doc = json!({ "instances": docs, "all_pass": all_ok });
            emit(out, opts.format, &doc, &text).map_err(io_err)?;
            Ok(if all_ok { EXIT_OK } else { EXIT_VERIFICATION })
        }
        other => Err(format!("unknown command {other:?}; see --help")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (u8, String, String) {
        let argv: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(&argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    const K32_INLINE: &str = r#"{"shores":[3,2],"edges":[[1,4],[1,5],[2,4],[2,5],[3,4],[3,5]]}"#;

    #[test]
    fn usage_errors_exit_64() {
        let (code, _, err) = run_capture(&[]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("usage"));
        let (code, _, _) = run_capture(&["routes", "--bogus"]);
        assert_eq!(code, EXIT_USAGE);
        let (code, _, _) = run_capture(&["hstar", "--graph", "k32", "--method", "nope"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn validation_failures_exit_1() {
        let (code, _, err) = run_capture(&[
            "validate",
            "--graph",
            r#"{"shores":[2,2],"edges":[[1,3],[2,3],[2,4]]}"#,
        ]);
        assert_eq!(code, EXIT_VALIDATION);
        assert!(err.contains("vertex 1"));
        let (code, _, _) = run_capture(&["validate", "--graph", "/nonexistent/file.json"]);
        assert_eq!(code, EXIT_VALIDATION);
    }

    #[test]
    fn validate_and_routes() {
        let (code, out, _) = run_capture(&["validate", "--graph", K32_INLINE]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("n=3 m=2 edges=6"));
        let (code, out, _) = run_capture(&["routes", "--graph", K32_INLINE]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out.lines().count(), 24);
        assert!(out.contains("a2_2 b_2_5 g_5_2"));
    }

    #[test]
    fn corpus_names_resolve() {
        let (code, out, _) = run_capture(&["extend", "--graph", "k22", "--format", "json"]);
        assert_eq!(code, EXIT_OK);
        let doc: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(doc["edge_count"], 12);
        assert_eq!(doc["dimension"], 7);
    }

    #[test]
    fn hstar_methods_agree() {
        let (c1, covers, _) = run_capture(&[
            "hstar", "--graph", "k32", "--method", "covers", "--format", "json",
        ]);
        let (c2, counts, _) = run_capture(&[
            "hstar", "--graph", "k32", "--method", "ehrhart", "--format", "json",
        ]);
        assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
        let covers: Value = serde_json::from_str(&covers).unwrap();
        let counts: Value = serde_json::from_str(&counts).unwrap();
        assert_eq!(covers["hstar"], counts["hstar"]);
        assert_eq!(covers["hstar"]["coeffs"], json!([1, 13, 49, 61, 28, 4]));
    }

    #[test]
    fn verify_passes_on_k22() {
        let (code, out, _) = run_capture(&["verify", "--graph", "k22"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("ALL CHECKS PASS"));
        assert!(out.lines().filter(|l| l.starts_with("PASS")).count() >= 10);
    }

    #[test]
    fn json_output_is_deterministic() {
        let (_, a, _) = run_capture(&[
            "verify", "--graph", "k22", "--format", "json", "--seed", "5",
        ]);
        let (_, b, _) = run_capture(&[
            "verify", "--graph", "k22", "--format", "json", "--seed", "5",
        ]);
        assert_eq!(a, b);
        let (_, c, _) = run_capture(&["matchings", "--graph", "k32", "--format", "json"]);
        let (_, d, _) = run_capture(&["matchings", "--graph", "k32", "--format", "json"]);
        assert_eq!(c, d);
    }

    #[test]
    fn whisker_output_lists_leaves() {
        let (code, out, _) = run_capture(&["whisker", "--graph", K32_INLINE]);
        assert_eq!(code, EXIT_OK);
        for leaf in [
            "w_1_5", "w_2_5", "w_3_5", "w_4_1", "w_4_2", "w_5_1", "w_5_2",
        ] {
            assert!(out.contains(leaf), "missing {leaf}");
        }
    }

    #[test]
    fn ehrhart_counts_with_tmax() {
        let (code, out, _) = run_capture(&[
            "ehrhart", "--graph", "k32", "--tmax", "2", "--format", "json",
        ]);
        assert_eq!(code, EXIT_OK);
        let doc: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(doc["counts"], json!([1, 24, 258]));
        assert_eq!(doc["volume"], 156);
    }

    #[test]
    fn text_polynomial_rendering() {
        let (_, out, _) = run_capture(&["hstar", "--graph", "k32"]);
        assert_eq!(out.trim(), "h* = 1 + 13z + 49z^2 + 61z^3 + 28z^4 + 4z^5");
    }
}
