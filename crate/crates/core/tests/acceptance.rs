//! Acceptance checks. Prints one line per criterion and exits non-zero if
//! any criterion fails. Dataset-backed checks run when `KGPROBE_DATA_DIR`
//! holds the corresponding files and are reported as SKIP otherwise.
//!
//! Recognized files in the data directory:
//! - `cn.tsv` (canonical graph) or `conceptnet-assertions-5.6*` (raw dump, optionally .gz)
//! - `swow.tsv` (canonical graph) or `SWOW-EN*` / `strength.SWOW-EN*` (release CSV)
//! - `script_graphs.jsonl` (script graphs with SRL spans already extracted)

mod common;

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use common::*;
use kg_probe_core::ingest::{label_swow_relations, parse_conceptnet, parse_swow};
use kg_probe_core::merge::{densify_reverse, merge_relations, MergeScheme, SchemeName};
use kg_probe_core::metrics::{avg_degree, avg_degree_from_counts, density, density_from_counts, graph_stats, node_entropy};
use kg_probe_core::overlap::{
    annotated_distribution, default_markers, intersection_graph, negation_stats, overlap_report, relation_recall,
    MatchMode,
};
use kg_probe_core::projection::{path_length_distribution, ProjectionOptions, Projector};
use kg_probe_core::scriptgraph::read_script_graphs;
use kg_probe_core::transe::{init_space, link_prediction_eval, train_transe, Norm, TrainConfig};
use kg_probe_core::{tsv, KnowledgeGraph};

// Tolerances.
const COUNT_REL_TOL: f64 = 0.03;
const DENSITY_REL_TOL: f64 = 0.05;
const DEGREE_REL_TOL: f64 = 0.02;
const ENTROPY_REL_TOL: f64 = 0.05;
const OVERLAP_PP_TOL: f64 = 0.03;
const INTERSECTION_REL_TOL: f64 = 0.05;
const RECALL_REL_TOL: f64 = 0.10;
const NEGATION_PP_TOL: f64 = 0.002;
const ORACLE_ABS_TOL: f64 = 1e-12;
const GRADIENT_REL_TOL: f64 = 1e-3;
const HITS_BASELINE_FACTOR: f64 = 3.0;
const MEAN_RANK_SE: f64 = 3.0;
const PROPERTY_BUDGET_S: f64 = 60.0;
const TRANSE_BUDGET_S: f64 = 120.0;

// Reference values.
const CN_COUNTS: (usize, usize, usize) = (1_080_759, 3_009_636, 47);
const SW_COUNTS: (usize, usize, usize) = (124_626, 1_593_564, 2);
const SW_DENSITY: f64 = 1.03e-4;
const CN_DENSITY_REFERENCE: f64 = 3.00e-6;
const DEGREES: (f64, f64) = (2.78, 12.78);
const ENTROPIES: (f64, f64) = (23.28, 18.07);
const SW_NODE_IN_CN: f64 = 0.58;
const CN_NODE_IN_SW: f64 = 0.07;
const CN_EDGE_IN_SW: f64 = 0.06;
const SW_EDGE_IN_CN: f64 = 0.15;
const INTERSECTION_EDGES: f64 = 190_000.0;
const RECALLS: [(&str, f64); 4] = [("distinctfrom", 0.5847), ("antonym", 0.2631), ("relatedto", 0.0738), ("mannerof", 0.2693)];
const NEGATION: (f64, f64) = (0.003, 0.007);

#[derive(PartialEq)]
enum Status {
    Pass,
    Fail,
    Skip,
}

struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check { failures: Vec::new(), notes: Vec::new() }
    }

    fn expect(&mut self, ok: bool, what: String) {
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn rel(&mut self, name: &str, got: f64, want: f64, tol: f64) {
        let ok = ((got - want) / want).abs() <= tol;
        self.expect(ok, format!("{name}={got:.6} (ref {want}, ±{:.0}%)", tol * 100.0));
    }

    fn abs(&mut self, name: &str, got: f64, want: f64, tol: f64) {
        self.expect((got - want).abs() <= tol, format!("{name}={got:.6} (ref {want} ±{tol})"));
    }

    fn status(&self) -> Status {
        if self.failures.is_empty() {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn summary(&self) -> String {
        let mut s = String::new();
        if !self.failures.is_empty() {
            let _ = write!(s, "failed: {}; ", self.failures.join(", "));
        }
        let _ = write!(s, "{}", self.notes.join(", "));
        s
    }
}

fn report(results: &mut Vec<Status>, id: u32, title: &str, status: Status, detail: String) {
    let tag = match status {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Skip => "SKIP",
    };
    println!("acceptance {id} {tag} {title}: {detail}");
    results.push(status);
}

struct Datasets {
    cn: Option<KnowledgeGraph>,
    swow: Option<KnowledgeGraph>,
    script_graphs: Option<std::path::PathBuf>,
}

fn load_canonical(path: &Path) -> Option<KnowledgeGraph> {
    tsv::read_graph(open_maybe_gz(path).ok()?).map_err(|e| eprintln!("{}: {e}", path.display())).ok()
}

fn load_datasets() -> Datasets {
    let Some(dir) = data_dir() else {
        return Datasets { cn: None, swow: None, script_graphs: None };
    };
    let cn = if let Some(p) = find_file(&dir, &["cn.tsv"]) {
        load_canonical(&p)
    } else {
        find_file(&dir, &["conceptnet-assertions-5.6"]).and_then(|p| {
            parse_conceptnet(open_maybe_gz(&p).ok()?).map(|(g, _)| g).map_err(|e| eprintln!("{}: {e}", p.display())).ok()
        })
    };
    let swow = if let Some(p) = find_file(&dir, &["swow.tsv"]) {
        load_canonical(&p)
    } else {
        find_file(&dir, &["strength.SWOW-EN", "SWOW-EN"]).and_then(|p| {
            let (g, _) = parse_swow(open_maybe_gz(&p).ok()?, 1).map_err(|e| eprintln!("{}: {e}", p.display())).ok()?;
            label_swow_relations(&g).ok()
        })
    };
    Datasets { cn, swow, script_graphs: find_file(&dir, &["script_graphs.jsonl"]) }
}

fn table1(results: &mut Vec<Status>, data: &Datasets) {
    let mut ck = Check::new();
    // Count arithmetic on the reference counts.
    let sw_d = density_from_counts(SW_COUNTS.1, SW_COUNTS.0).unwrap();
    let cn_d = density_from_counts(CN_COUNTS.1, CN_COUNTS.0).unwrap();
    ck.rel("swow_density(counts)", sw_d, SW_DENSITY, DENSITY_REL_TOL);
    ck.rel("cn_degree(counts)", avg_degree_from_counts(CN_COUNTS.1, CN_COUNTS.0), DEGREES.0, DEGREE_REL_TOL);
    ck.rel("swow_degree(counts)", avg_degree_from_counts(SW_COUNTS.1, SW_COUNTS.0), DEGREES.1, DEGREE_REL_TOL);
    ck.notes.push(format!("cn_density(counts)={cn_d:.4e} (reference value {CN_DENSITY_REFERENCE:.2e} does not follow from the reference counts)"));

    let (Some(cn), Some(sw)) = (&data.cn, &data.swow) else {
        let status = if ck.status() == Status::Fail { Status::Fail } else { Status::Skip };
        let detail = format!("datasets absent from KGPROBE_DATA_DIR, dataset checks not run; count arithmetic: {}", ck.summary());
        report(results, 1, "graph statistics", status, detail);
        return;
    };
    for (name, g, want, h, deg) in [("cn", cn, CN_COUNTS, ENTROPIES.0, DEGREES.0), ("swow", sw, SW_COUNTS, ENTROPIES.1, DEGREES.1)] {
        let s = graph_stats(g);
        ck.rel(&format!("{name}_nodes"), s.n_nodes as f64, want.0 as f64, COUNT_REL_TOL);
        ck.rel(&format!("{name}_edges"), s.n_triples as f64, want.1 as f64, COUNT_REL_TOL);
        ck.rel(&format!("{name}_relations"), s.n_relations as f64, want.2 as f64, COUNT_REL_TOL);
        ck.rel(&format!("{name}_avg_degree"), s.avg_degree, deg, DEGREE_REL_TOL);
        ck.rel(&format!("{name}_entropy"), s.node_entropy.unwrap_or(f64::NAN), h, ENTROPY_REL_TOL);
    }
    ck.rel("swow_density", density(sw).unwrap_or(f64::NAN), SW_DENSITY, DENSITY_REL_TOL);
    ck.notes.push(format!("cn_density={:.4e}", density(cn).unwrap_or(f64::NAN)));
    report(results, 1, "graph statistics", ck.status(), ck.summary());
}

fn overlap(results: &mut Vec<Status>, data: &Datasets) {
    let (Some(cn), Some(sw)) = (&data.cn, &data.swow) else {
        report(results, 2, "overlap", Status::Skip, "datasets absent from KGPROBE_DATA_DIR".into());
        return;
    };
    let mut ck = Check::new();
    let rep = overlap_report(cn, sw);
    ck.abs("swow_nodes_in_cn", rep.nodes.frac_of_b, SW_NODE_IN_CN, OVERLAP_PP_TOL);
    ck.abs("cn_nodes_in_swow", rep.nodes.frac_of_a, CN_NODE_IN_SW, OVERLAP_PP_TOL);
    ck.abs("cn_edges_in_swow", rep.edges.edge_frac_of_a, CN_EDGE_IN_SW, OVERLAP_PP_TOL);
    ck.abs("swow_edges_in_cn", rep.edges.edge_frac_of_b, SW_EDGE_IN_CN, OVERLAP_PP_TOL);
    ck.rel("intersection_edges", rep.intersection_edges as f64, INTERSECTION_EDGES, INTERSECTION_REL_TOL);
    let among = rep.edges.b_edges_among_shared_nodes as f64 / rep.b_edges as f64;
    ck.expect(among >= 0.9, format!("swow_edges_among_shared={among:.4} (>= 0.9)"));
    ck.notes.push(format!(
        "shared_nodes={}, cn_edges_among_shared={}",
        rep.nodes.shared_nodes, rep.edges.a_edges_among_shared_nodes
    ));
    report(results, 2, "overlap", ck.status(), ck.summary());
}

fn recall(results: &mut Vec<Status>, data: &Datasets) {
    let (Some(cn), Some(sw)) = (&data.cn, &data.swow) else {
        report(results, 3, "relation recall", Status::Skip, "datasets absent from KGPROBE_DATA_DIR".into());
        return;
    };
    let mut ck = Check::new();
    let inter = intersection_graph(cn, sw);
    let rows = relation_recall(cn, &inter).expect("intersection is a subgraph");
    let by_name: BTreeMap<&str, f64> = rows.iter().map(|r| (r.relation.as_str(), r.recall)).collect();
    for (rel, want) in RECALLS {
        ck.rel(rel, by_name.get(rel).copied().unwrap_or(0.0), want, RECALL_REL_TOL);
    }
    report(results, 3, "relation recall", ck.status(), ck.summary());
}

fn negation(results: &mut Vec<Status>, data: &Datasets) {
    let (Some(cn), Some(sw)) = (&data.cn, &data.swow) else {
        report(results, 4, "negation", Status::Skip, "datasets absent from KGPROBE_DATA_DIR".into());
        return;
    };
    let mut ck = Check::new();
    let markers = default_markers();
    ck.abs("cn_fraction", negation_stats(cn, &markers, MatchMode::Token).fraction, NEGATION.0, NEGATION_PP_TOL);
    ck.abs("swow_fraction", negation_stats(sw, &markers, MatchMode::Token).fraction, NEGATION.1, NEGATION_PP_TOL);
    report(results, 4, "negation", ck.status(), ck.summary());
}

fn script_coverage(results: &mut Vec<Status>, data: &Datasets) {
    let mut ck = Check::new();
    let (kg, graphs) = fixture_narratives();
    let (_, dist) = path_length_distribution(&graphs, &kg, ProjectionOptions::default());
    let got: BTreeMap<usize, usize> = dist.histogram.iter().map(|b| (b.length, b.count)).collect();
    let want = oracle_histogram(&kg, &graphs, 10);
    ck.expect(got == want, format!("fixture histogram {got:?} vs Floyd-Warshall {want:?} over {} narratives", graphs.len()));

    match (&data.cn, &data.swow, &data.script_graphs) {
        (Some(cn), Some(sw), Some(path)) => {
            let graphs = read_script_graphs(open_maybe_gz(path).expect("readable")).expect("valid script graphs");
            let mean = |g: &KnowledgeGraph| path_length_distribution(&graphs, g, ProjectionOptions::default()).1.mean_length;
            let (m_cn, m_sw) = (mean(cn), mean(sw));
            let ok = matches!((m_cn, m_sw), (Some(a), Some(b)) if b < a);
            ck.expect(ok, format!("mean path length swow={m_sw:?} < cn={m_cn:?}"));
        }
        _ => ck.notes.push("directional dataset check SKIPPED (datasets absent)".into()),
    }
    report(results, 5, "script-graph coverage", ck.status(), ck.summary());
}

fn cn_relations() -> Vec<String> {
    MergeScheme::builtin(SchemeName::Seventeen).mapping.keys().map(|r| r.to_string()).collect()
}

fn properties(results: &mut Vec<Status>) {
    let start = Instant::now();
    let mut ck = Check::new();
    let mut rng = rng(2024);

    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let g = random_graph(&mut rng, 20, 60, 4);
        let (d, k, h) = stats_oracle(&g);
        worst = worst
            .max((density(&g).unwrap() - d).abs())
            .max((avg_degree(&g) - k).abs())
            .max((node_entropy(&g).unwrap() - h).abs());
    }
    ck.expect(worst <= ORACLE_ABS_TOL, format!("metrics oracle max error {worst:.1e} on 50 graphs"));

    let mut mismatches = 0;
    for _ in 0..100 {
        let g = random_graph(&mut rng, 50, 80, 3);
        let d = floyd_warshall(&g);
        let p = Projector::new(&g, ProjectionOptions { max_depth: usize::MAX, head_fallback: false });
        for i in 0..g.node_count() {
            for j in 0..g.node_count() {
                if p.project(g.node(i as u32), g.node(j as u32)).length != d[i][j] {
                    mismatches += 1;
                }
            }
        }
    }
    ck.expect(mismatches == 0, format!("BFS vs all-pairs mismatches {mismatches} on 100 graphs"));

    let mut identity_failures = 0;
    for _ in 0..50 {
        let a = random_graph(&mut rng, 15, 40, 3);
        let b = random_graph(&mut rng, 15, 40, 2);
        let inter = intersection_graph(&a, &b);
        let b_pairs: HashSet<(String, String)> = b
            .triples()
            .flat_map(|t| [(t.head.to_string(), t.tail.to_string()), (t.tail.to_string(), t.head.to_string())])
            .collect();
        let brute = a.triples().filter(|t| b_pairs.contains(&(t.head.to_string(), t.tail.to_string()))).count();
        let rows = relation_recall(&a, &inter).unwrap();
        let sum: usize = rows.iter().map(|r| r.intersection_count).sum();
        let full: usize = rows.iter().map(|r| r.full_count).sum();
        let ratios = rows.iter().all(|r| r.recall * r.full_count as f64 == r.intersection_count as f64 || r.full_count == 0);
        if inter.edge_count() != brute || sum != brute || full != a.edge_count() || !ratios {
            identity_failures += 1;
        }
        let (ab, ba) = (overlap_report(&a, &b), overlap_report(&b, &a));
        if ab.nodes.shared_nodes != ba.nodes.shared_nodes || ab.edges.shared_edges_undirected != ba.edges.shared_edges_undirected {
            identity_failures += 1;
        }
    }
    ck.expect(identity_failures == 0, format!("intersection/recall identity failures {identity_failures}"));

    let rels = cn_relations();
    let mut merge_failures = 0;
    let mut densify_failures = 0;
    let mut tsv_failures = 0;
    for _ in 0..50 {
        let base = random_graph(&mut rng, 20, 50, rels.len());
        let g = KnowledgeGraph::from_triples(base.triples().map(|mut t| {
            let i: usize = t.relation.as_str()[1..].parse().unwrap();
            t.relation = r(&rels[i]);
            t
        }))
        .unwrap();
        for scheme in [SchemeName::Seventeen, SchemeName::Seven, SchemeName::One] {
            let (m, rep) = merge_relations(&g, &MergeScheme::builtin(scheme));
            if m.total_weight() != g.total_weight() || !rep.dropped.is_empty() {
                merge_failures += 1;
            }
        }
        let d = densify_reverse(&g);
        if d.edge_count() != 2 * g.edge_count() || d.relation_count() != 2 * g.relation_count() {
            densify_failures += 1;
        }
        let mut buf = Vec::new();
        tsv::write_graph(&g, &mut buf).unwrap();
        let back = tsv::read_graph(buf.as_slice()).unwrap();
        let mut again = Vec::new();
        tsv::write_graph(&back, &mut again).unwrap();
        if back != g || again != buf {
            tsv_failures += 1;
        }
    }
    ck.expect(merge_failures == 0, format!("merge weight conservation failures {merge_failures}"));
    ck.expect(densify_failures == 0, format!("densify doubling failures {densify_failures}"));
    ck.expect(tsv_failures == 0, format!("TSV round-trip failures {tsv_failures}"));

    let elapsed = start.elapsed().as_secs_f64();
    ck.expect(elapsed < PROPERTY_BUDGET_S, format!("{elapsed:.1}s (< {PROPERTY_BUDGET_S}s)"));
    report(results, 6, "property suites", ck.status(), ck.summary());
}

fn transe(results: &mut Vec<Status>) {
    let start = Instant::now();
    let mut ck = Check::new();

    let g = planted_small();
    let cfg = TrainConfig { dim: 16, epochs: 20, seed: 3, ..Default::default() };
    let a = train_transe(&g, &cfg).unwrap();
    let b = train_transe(&g, &cfg).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    let same = bits(&a.node_vectors) == bits(&b.node_vectors)
        && bits(&a.relation_vectors) == bits(&b.relation_vectors)
        && bits(&a.loss_history) == bits(&b.loss_history);
    ck.expect(same, "reruns bitwise equal".into());

    let worst = (0..20).map(|s| gradient_check(s, Norm::L2)).fold(0.0, f64::max);
    ck.expect(worst < GRADIENT_REL_TOL, format!("gradient max relative error {worst:.2e}"));

    let p = planted_large(11);
    let trained = train_transe(&p.train, &TrainConfig { dim: 32, epochs: 100, seed: 5, ..Default::default() }).unwrap();
    let rep = link_prediction_eval(&trained, &p.heldout, &p.candidates).unwrap();
    let baseline = 10.0 / p.candidates.len() as f64;
    ck.expect(
        rep.hits_at_10 >= HITS_BASELINE_FACTOR * baseline,
        format!("planted hits@10 {:.3} vs random {baseline:.3}", rep.hits_at_10),
    );

    let mut rng = rng(21);
    let g = random_graph_exact(&mut rng, 150, 300, 4);
    let space = init_space(&g, &TrainConfig { dim: 20, seed: 8, ..Default::default() }).unwrap();
    let queries: Vec<_> = g.triples().collect();
    let mut candidates = g.nodes().to_vec();
    candidates.sort();
    let n = candidates.len() as f64;
    let rep = link_prediction_eval(&space, &queries, &candidates).unwrap();
    let se = ((n * n - 1.0) / 12.0).sqrt() / (queries.len() as f64).sqrt();
    let want = (n + 1.0) / 2.0;
    ck.expect(
        (rep.mean_rank - want).abs() <= MEAN_RANK_SE * se,
        format!("untrained mean rank {:.2} vs {want} ± {:.2} over {} queries", rep.mean_rank, MEAN_RANK_SE * se, queries.len()),
    );

    let elapsed = start.elapsed().as_secs_f64();
    ck.expect(elapsed < TRANSE_BUDGET_S, format!("{elapsed:.1}s (< {TRANSE_BUDGET_S}s)"));
    report(results, 7, "TransE sanity", ck.status(), ck.summary());
}

fn desk_scale(results: &mut Vec<Status>) {
    // Only the tag-distribution arithmetic is checkable without external
    // annotation files and QA fine-tuning.
    let tags: BTreeMap<_, String> =
        [("eat", "VB"), ("apple", "NN"), ("red", "JJ"), ("dog", "NN"), ("run", "VB"), ("tree", "NN")]
            .into_iter()
            .map(|(k, v)| (c(k), v.to_string()))
            .collect();
    let dist = annotated_distribution(&tags, 10).unwrap();
    let got: Vec<(&str, usize)> = dist.iter().map(|t| (t.tag.as_str(), t.count)).collect();
    let ok = got == [("NN", 3), ("VB", 2), ("JJ", 1)] && (dist[0].fraction - 0.5).abs() < 1e-15;
    let status = if ok { Status::Pass } else { Status::Fail };
    report(
        results,
        8,
        "desk-scale limits",
        status,
        format!("QA accuracies not reproducible here; tag distribution arithmetic on fixture {got:?}"),
    );
}

fn main() -> ExitCode {
    let data = load_datasets();
    let mut results = Vec::new();
    table1(&mut results, &data);
    overlap(&mut results, &data);
    recall(&mut results, &data);
    negation(&mut results, &data);
    script_coverage(&mut results, &data);
    properties(&mut results);
    transe(&mut results);
    desk_scale(&mut results);
    let failed = results.iter().filter(|s| **s == Status::Fail).count();
    let skipped = results.iter().filter(|s| **s == Status::Skip).count();
    println!("acceptance summary: {} pass, {failed} fail, {skipped} skip", results.len() - failed - skipped);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
