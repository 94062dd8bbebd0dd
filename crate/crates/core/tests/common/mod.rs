#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use kg_probe_core::scriptgraph::ScriptGraph;
use kg_probe_core::transe::{margin_term, margin_term_grad, Norm, TermInputs};
use kg_probe_core::{ConceptId, KnowledgeGraph, RelationId, Triple};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(s: &str) -> ConceptId {
    ConceptId::parse(s).unwrap()
}

pub fn r(s: &str) -> RelationId {
    RelationId::new(s).unwrap()
}

pub fn t(h: &str, rel: &str, tail: &str) -> Triple {
    Triple::new(c(h), r(rel), c(tail), 1.0)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small random multigraph over `n{i}` nodes and `r{j}` relations with
/// integer weights. Duplicates accumulate.
pub fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize, max_edges: usize, relations: usize) -> KnowledgeGraph {
    let n = rng.gen_range(2..=max_nodes);
    let m = rng.gen_range(1..=max_edges);
    let triples: Vec<Triple> = (0..m)
        .map(|_| {
            Triple::new(
                c(&format!("n{}", rng.gen_range(0..n))),
                r(&format!("r{}", rng.gen_range(0..relations))),
                c(&format!("n{}", rng.gen_range(0..n))),
                rng.gen_range(1..5) as f64,
            )
        })
        .collect();
    KnowledgeGraph::from_triples(triples).unwrap()
}

/// 20 nodes in two clusters; `r{k}` maps `a{i}` to `b{i}` for `i` in
/// `{2k, 2k+1}`.
pub fn planted_small() -> KnowledgeGraph {
    let mut triples = Vec::new();
    for k in 0..5 {
        for i in [2 * k, 2 * k + 1] {
            triples.push(t(&format!("a{i}"), &format!("r{k}"), &format!("b{i}")));
        }
    }
    KnowledgeGraph::from_triples(triples).unwrap()
}

/// Exactly `nodes` nodes and `edges` distinct random triples.
pub fn random_graph_exact(rng: &mut ChaCha8Rng, nodes: usize, edges: usize, relations: usize) -> KnowledgeGraph {
    let mut g = KnowledgeGraph::new();
    for i in 0..nodes {
        g.add_node(&c(&format!("n{i}")));
    }
    while g.edge_count() < edges {
        let tr = Triple::new(
            c(&format!("n{}", rng.gen_range(0..nodes))),
            r(&format!("r{}", rng.gen_range(0..relations))),
            c(&format!("n{}", rng.gen_range(0..nodes))),
            1.0,
        );
        g.add_triple(tr).unwrap();
    }
    g
}

pub struct Planted {
    pub train: KnowledgeGraph,
    pub heldout: Vec<Triple>,
    pub candidates: Vec<ConceptId>,
}

/// 200 nodes. Relation `r{k}` links each of 20 source nodes `s{k} {i}` to 5
/// random targets among 20 nodes `o{k} {j}`. One edge per source is held out.
pub fn planted_large(seed: u64) -> Planted {
    let mut rng = rng(seed);
    let mut train = Vec::new();
    let mut heldout = Vec::new();
    for k in 0..5 {
        for i in 0..20 {
            let mut targets: Vec<usize> = (0..20).collect();
            for j in 0..5 {
                let pick = rng.gen_range(j..20);
                targets.swap(j, pick);
            }
            for (j, &o) in targets[..5].iter().enumerate() {
                let triple = t(&format!("s{k} {i}"), &format!("r{k}"), &format!("o{k} {o}"));
                if j == 0 {
                    heldout.push(triple);
                } else {
                    train.push(triple);
                }
            }
        }
    }
    let train = KnowledgeGraph::from_triples(train).unwrap();
    let mut candidates = train.nodes().to_vec();
    candidates.sort();
    Planted { train, heldout, candidates }
}

/// All-pairs undirected hop distances, ignoring direction and labels.
pub fn floyd_warshall(g: &KnowledgeGraph) -> Vec<Vec<Option<usize>>> {
    let n = g.node_count();
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0);
    }
    for e in g.edges() {
        let (a, b) = (e.head as usize, e.tail as usize);
        if a != b {
            d[a][b] = Some(1);
            d[b][a] = Some(1);
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = d[i][k] else { continue };
            for j in 0..n {
                if let Some(kj) = d[k][j] {
                    if d[i][j].is_none_or(|ij| ik + kj < ij) {
                        d[i][j] = Some(ik + kj);
                    }
                }
            }
        }
    }
    d
}

/// Simple-BFS oracle for the lexicographically smallest shortest path: the
/// path whose node-string sequence is smallest among all shortest ones.
pub fn smallest_shortest_path(g: &KnowledgeGraph, src: &str, dst: &str) -> Option<Vec<String>> {
    let s = g.node_id(src)? as usize;
    let d = g.node_id(dst)? as usize;
    let n = g.node_count();
    let mut adj: Vec<HashSet<usize>> = vec![HashSet::new(); n];
    for e in g.edges() {
        if e.head != e.tail {
            adj[e.head as usize].insert(e.tail as usize);
            adj[e.tail as usize].insert(e.head as usize);
        }
    }
    // distance to destination, then greedy smallest-label descent from src
    let mut dist = vec![usize::MAX; n];
    dist[d] = 0;
    let mut q = VecDeque::from([d]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    if dist[s] == usize::MAX {
        return None;
    }
    let mut path = vec![g.node(s as u32).to_string()];
    let mut u = s;
    while u != d {
        u = *adj[u]
            .iter()
            .filter(|&&v| dist[v] + 1 == dist[u])
            .min_by(|&&a, &&b| g.node(a as u32).cmp(g.node(b as u32)))
            .unwrap();
        path.push(g.node(u as u32).to_string());
    }
    Some(path)
}

/// Ten narratives over a small chain-and-hub graph, covering direct edges,
/// multi-hop paths, unreachable pairs and missing endpoints.
pub fn fixture_narratives() -> (KnowledgeGraph, Vec<ScriptGraph>) {
    let kg = KnowledgeGraph::from_triples([
        t("plant", "relatedto", "tree"),
        t("tree", "atlocation", "garden"),
        t("garden", "hasa", "soil"),
        t("soil", "relatedto", "dig"),
        t("dig", "usedfor", "hole"),
        t("hole", "relatedto", "ground"),
        t("water", "relatedto", "plant"),
        t("water", "atlocation", "garden"),
        t("seed", "relatedto", "plant"),
        t("buy", "relatedto", "store"),
        t("store", "relatedto", "seed"),
        t("cook", "relatedto", "dinner"),
        t("dinner", "relatedto", "eat"),
        t("kitchen", "relatedto", "cook"),
        t("island", "relatedto", "sea"),
    ])
    .unwrap();
    let specs: [(&str, &[(&str, &str)]); 10] = [
        ("n01", &[("plant", "tree"), ("plant", "water")]),
        ("n02", &[("dig", "hole"), ("dig", "garden")]),
        ("n03", &[("buy", "seed"), ("buy", "plant")]),
        ("n04", &[("cook", "dinner"), ("eat", "kitchen")]),
        ("n05", &[("hole", "seed"), ("ground", "water")]),
        ("n06", &[("island", "plant"), ("sea", "sea shell")]),
        ("n07", &[("eat", "plant"), ("cook", "water")]),
        ("n08", &[("soil", "tree"), ("store", "garden")]),
        ("n09", &[("buy", "ground"), ("kitchen", "dinner")]),
        ("n10", &[("hole", "water"), ("unicorn", "plant"), ("seed", "tree")]),
    ];
    let graphs = specs
        .iter()
        .map(|(id, pairs)| {
            let mut g = ScriptGraph { id: id.to_string(), nodes: Default::default(), edges: Default::default() };
            for &(a, b) in pairs.iter() {
                let (a, b) = if a <= b { (a, b) } else { (b, a) };
                g.nodes.insert(c(a));
                g.nodes.insert(c(b));
                g.edges.insert((c(a), c(b)));
            }
            g
        })
        .collect();
    (kg, graphs)
}

/// Histogram of finite nonzero distances over all script-graph edges.
pub fn oracle_histogram(kg: &KnowledgeGraph, graphs: &[ScriptGraph], max_depth: usize) -> BTreeMap<usize, usize> {
    let d = floyd_warshall(kg);
    let mut hist = BTreeMap::new();
    for g in graphs {
        for (a, b) in &g.edges {
            if let (Some(i), Some(j)) = (kg.node_id(a.as_str()), kg.node_id(b.as_str())) {
                if let Some(len) = d[i as usize][j as usize] {
                    if len <= max_depth {
                        *hist.entry(len).or_insert(0) += 1;
                    }
                }
            }
        }
    }
    hist
}

/// Brute-force statistics straight from the triple list: (density, avg
/// degree, node entropy).
pub fn stats_oracle(g: &KnowledgeGraph) -> (f64, f64, f64) {
    let triples: Vec<Triple> = g.triples().collect();
    let e = triples.len() as f64;
    let mut degree: HashMap<&str, f64> = HashMap::new();
    for tr in &triples {
        *degree.entry(tr.head.as_str()).or_default() += 1.0;
        *degree.entry(tr.tail.as_str()).or_default() += 1.0;
    }
    let n = g.node_count() as f64;
    let entropy = degree.values().map(|d| d / e).map(|p| -p * p.ln()).sum();
    (e / (n * (n - 1.0)), e / n, entropy)
}

/// `KGPROBE_DATA_DIR`, when set and existing.
pub fn data_dir() -> Option<PathBuf> {
    let dir = PathBuf::from(std::env::var_os("KGPROBE_DATA_DIR")?);
    dir.is_dir().then_some(dir)
}

/// First file in `dir` whose name starts with one of `prefixes`.
pub fn find_file(dir: &Path, prefixes: &[&str]) -> Option<PathBuf> {
    let mut names: Vec<PathBuf> = std::fs::read_dir(dir).ok()?.filter_map(|e| e.ok().map(|e| e.path())).collect();
    names.sort();
    prefixes.iter().find_map(|p| {
        names
            .iter()
            .find(|path| path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with(p)))
            .cloned()
    })
}

pub fn open_maybe_gz(path: &Path) -> std::io::Result<Box<dyn BufRead>> {
    let file = File::open(path)?;
    let reader: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(flate2::read::MultiGzDecoder::new(file))
    } else {
        Box::new(file)
    };
    Ok(Box::new(BufReader::with_capacity(1 << 20, reader)))
}

/// Max relative error between the analytic gradient and central differences
/// of a summed margin loss over fixed (positive, corruption) pairs.
pub fn gradient_check(seed: u64, norm: Norm) -> f64 {
    let mut rng = rng(seed);
    let dim = 5;
    let (n_nodes, n_rels) = (4, 2);
    // node vectors then relation vectors
    let mut params: Vec<f64> = (0..(n_nodes + n_rels) * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let terms: Vec<[usize; 5]> = (0..6)
        .map(|_| {
            let h = rng.gen_range(0..n_nodes);
            let t = rng.gen_range(0..n_nodes);
            let other = rng.gen_range(0..n_nodes);
            let (ch, ct) = if rng.gen_bool(0.5) { (other, t) } else { (h, other) };
            [h, rng.gen_range(0..n_rels), t, ch, ct]
        })
        .collect();
    let margin = 4.0;
    let slice = |p: &[f64], i: usize| p[i * dim..(i + 1) * dim].to_vec();
    let inputs = |p: &[f64], [h, r, t, ch, ct]: [usize; 5]| {
        [slice(p, h), slice(p, n_nodes + r), slice(p, t), slice(p, ch), slice(p, ct)]
    };
    let loss = |p: &[f64]| -> f64 {
        terms
            .iter()
            .map(|&term| {
                let [h, r, t, ch, ct] = inputs(p, term);
                margin_term(
                    TermInputs { head: &h, relation: &r, tail: &t, corrupt_head: &ch, corrupt_tail: &ct },
                    margin,
                    norm,
                )
            })
            .sum()
    };
    let mut analytic = vec![0.0; params.len()];
    for &term in &terms {
        let [h, r, t, ch, ct] = inputs(&params, term);
        let (_, g) = margin_term_grad(
            TermInputs { head: &h, relation: &r, tail: &t, corrupt_head: &ch, corrupt_tail: &ct },
            margin,
            norm,
        );
        let [hi, ri, ti, chi, cti] = term;
        for (slot, grad) in [(hi, &g.head), (n_nodes + ri, &g.relation), (ti, &g.tail), (chi, &g.corrupt_head), (cti, &g.corrupt_tail)] {
            for k in 0..dim {
                analytic[slot * dim + k] += grad[k];
            }
        }
    }
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 0..params.len() {
        let orig = params[i];
        params[i] = orig + eps;
        let up = loss(&params);
        params[i] = orig - eps;
        let down = loss(&params);
        params[i] = orig;
        let numeric = (up - down) / (2.0 * eps);
        let scale = analytic[i].abs().max(numeric.abs());
        if scale > 1e-7 {
            worst = worst.max((analytic[i] - numeric).abs() / scale);
        }
    }
    worst
}

