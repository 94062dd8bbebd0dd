use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use kg_probe_core::grounding::{ground_item, retrieve_paths, GroundedItem, KgPath, QaItem};
use kg_probe_core::ingest::{label_swow_relations, parse_conceptnet, parse_swow, IngestReport};
use kg_probe_core::lemma::{default_stopwords, read_stopwords, Lemmatizer};
use kg_probe_core::merge::{densify_reverse, merge_relations, MergeScheme};
use kg_probe_core::metrics::{graph_stats, GraphStats};
use kg_probe_core::overlap::{
    annotated_distribution, corpus_frequency_coverage, default_markers, intersection_graph, negation_stats,
    overlap_report, read_annotations, read_frequency_table, read_markers, relation_recall, MatchMode,
};
use kg_probe_core::projection::{path_length_distribution, LengthDistribution, NarrativeProjection, ProjectionOptions};
use kg_probe_core::scriptgraph::{build_script_graph, read_narratives, read_script_graphs, ScriptGraph};
use kg_probe_core::transe::{export_node_matrix, export_relation_matrix, link_prediction_eval, train_transe, Norm, TrainConfig};
use kg_probe_core::{tsv, ConceptId, KnowledgeGraph};
use serde::Serialize;

use crate::io::{fmt6, open, read_graph};
use crate::manifest::Recorder;
use crate::*;

pub fn run(cmd: &Command, manifest: Option<&Path>) -> Result<()> {
    let params = serde_json::to_value(cmd)?;
    let mut rec = Recorder::new(cmd.name(), params);
    match cmd {
        Command::Ingest(a) => ingest(&mut rec, a)?,
        Command::Stats(a) => stats(&mut rec, a)?,
        Command::Overlap(a) => overlap(&mut rec, a)?,
        Command::Relrecall(a) => {
            let full = read_graph(&mut rec, &a.full)?;
            let other = read_graph(&mut rec, &a.other)?;
            let out = rec.output(a.out.as_deref())?;
            write_recall(out, &full, &other)?;
        }
        Command::Negation(a) => negation(&mut rec, a)?,
        Command::Annodist(a) => annodist(&mut rec, a)?,
        Command::Corpusfreq(a) => {
            let g = read_graph(&mut rec, &a.kg)?;
            let table = read_frequency_table(open(&mut rec, &a.table)?)?;
            let out = rec.output(a.out.as_deref())?;
            write_json(out, &corpus_frequency_coverage(&g, &table))?;
        }
        Command::Scriptgraph(a) => scriptgraph(&mut rec, a)?,
        Command::Project(a) => project(&mut rec, a)?,
        Command::Ground(a) => ground(&mut rec, a)?,
        Command::Paths(a) => paths(&mut rec, a)?,
        Command::Merge(a) => {
            let g = read_graph(&mut rec, &a.kg)?;
            let (merged, report) = merge_relations(&g, &MergeScheme::builtin(a.scheme));
            rec.note("merge", &report);
            tsv::write_graph(&merged, rec.output(a.out.as_deref())?)?;
        }
        Command::Densify(a) => {
            let g = read_graph(&mut rec, &a.kg)?;
            let d = densify_reverse(&g);
            rec.note("edges", d.edge_count());
            tsv::write_graph(&d, rec.output(a.out.as_deref())?)?;
        }
        Command::Transe(a) => transe(&mut rec, a)?,
        Command::Table1(a) => table1(&mut rec, a)?,
        Command::Fig3(a) => {
            let cn = read_graph(&mut rec, &a.cn)?;
            let swow = read_graph(&mut rec, &a.swow)?;
            let out = rec.output(a.out.as_deref())?;
            write_recall(out, &cn, &swow)?;
        }
        Command::Fig4(a) => fig4(&mut rec, a)?,
    }
    let path = rec.finish(manifest)?;
    log::info!("manifest written to {}", path.display());
    Ok(())
}

fn write_json<T: Serialize>(mut out: Box<dyn Write>, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn write_jsonl<T: Serialize>(mut out: Box<dyn Write>, rows: &[T]) -> Result<()> {
    for row in rows {
        serde_json::to_writer(&mut out, row)?;
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

fn stopwords(rec: &mut Recorder, path: Option<&Path>) -> Result<HashSet<String>> {
    match path {
        Some(p) => Ok(read_stopwords(open(rec, p)?)?),
        None => Ok(default_stopwords()),
    }
}

fn ingest(rec: &mut Recorder, a: &IngestArgs) -> Result<()> {
    let input = open(rec, &a.input)?;
    let (g, report): (KnowledgeGraph, IngestReport) = match a.format {
        InputFormat::Conceptnet => parse_conceptnet(input)?,
        InputFormat::Swow => {
            let (g, mut report) = parse_swow(input, a.min_freq)?;
            if a.no_label || g.is_empty() {
                (g, report)
            } else {
                let labeled = label_swow_relations(&g)?;
                report.relations = labeled.relation_count();
                (labeled, report)
            }
        }
        InputFormat::Canonical => {
            let g = tsv::read_graph(input)?;
            let report = IngestReport {
                nodes: g.node_count(),
                edges: g.edge_count(),
                relations: g.relation_count(),
                raw_triples: g.edge_count(),
                ..Default::default()
            };
            (g, report)
        }
    };
    tsv::write_graph(&g, rec.output(a.out.as_deref())?)?;
    match &a.report {
        Some(p) => {
            let out = rec.output(Some(p))?;
            write_json(out, &report)?;
        }
        None => eprintln!("{}", serde_json::to_string(&report)?),
    }
    rec.note("ingest", &report);
    Ok(())
}

fn stats(rec: &mut Recorder, a: &StatsArgs) -> Result<()> {
    let g = read_graph(rec, &a.input)?;
    let out = rec.output(a.out.as_deref())?;
    write_json(out, &graph_stats(&g))
}

fn overlap(rec: &mut Recorder, a: &OverlapArgs) -> Result<()> {
    let ga = read_graph(rec, &a.a)?;
    let gb = read_graph(rec, &a.b)?;
    let out = rec.output(a.out.as_deref())?;
    write_json(out, &overlap_report(&ga, &gb))?;
    if let Some(p) = &a.intersection {
        tsv::write_graph(&intersection_graph(&ga, &gb), rec.output(Some(p))?)?;
    }
    Ok(())
}

/// `relation, f_r, recall_r` for `full` against its intersection with `other`.
fn write_recall(mut out: Box<dyn Write>, full: &KnowledgeGraph, other: &KnowledgeGraph) -> Result<()> {
    let inter = intersection_graph(full, other);
    let rows = relation_recall(full, &inter)?;
    writeln!(out, "relation\tf_r\trecall_r")?;
    for r in rows {
        writeln!(out, "{}\t{}\t{}", r.relation, fmt6(r.frequency), fmt6(r.recall))?;
    }
    out.flush()?;
    Ok(())
}

fn negation(rec: &mut Recorder, a: &NegationArgs) -> Result<()> {
    let g = read_graph(rec, &a.input)?;
    let markers: Vec<ConceptId> = match &a.markers {
        Some(p) => read_markers(open(rec, p)?)?,
        None => default_markers(),
    };
    let mode = match a.mode {
        MatchModeArg::Token => MatchMode::Token,
        MatchModeArg::Substring => MatchMode::Substring,
    };
    let out = rec.output(a.out.as_deref())?;
    write_json(out, &negation_stats(&g, &markers, mode))
}

fn annodist(rec: &mut Recorder, a: &AnnodistArgs) -> Result<()> {
    let mut annotations = read_annotations(open(rec, &a.annotations)?)?;
    if let Some(kg) = &a.kg {
        let g = read_graph(rec, kg)?;
        annotations.retain(|c, _| g.contains_node(c.as_str()));
    }
    let rows = annotated_distribution(&annotations, a.top_k)?;
    let mut out = rec.output(a.out.as_deref())?;
    writeln!(out, "tag\tcount\tfraction")?;
    for r in rows {
        writeln!(out, "{}\t{}\t{}", r.tag, r.count, fmt6(r.fraction))?;
    }
    out.flush()?;
    Ok(())
}

fn scriptgraph(rec: &mut Recorder, a: &ScriptgraphArgs) -> Result<()> {
    let narratives = read_narratives(open(rec, &a.srl)?)?;
    let stop = stopwords(rec, a.stopwords.as_deref())?;
    let mut lemmatizer = Lemmatizer::new();
    if let Some(p) = &a.lemmas {
        lemmatizer = lemmatizer.with_overrides(Lemmatizer::read_overrides(open(rec, p)?)?);
    }
    let graphs: Vec<ScriptGraph> =
        narratives.iter().map(|n| build_script_graph(&n.id, &n.frames, &stop, &lemmatizer)).collect();
    rec.note("narratives", graphs.len());
    write_jsonl(rec.output(a.out.as_deref())?, &graphs)
}

fn read_graphs(rec: &mut Recorder, path: &Path) -> Result<Vec<ScriptGraph>> {
    let input = open(rec, path)?;
    read_script_graphs(input).with_context(|| format!("reading script graphs {}", path.display()))
}

fn write_hist(out: &mut dyn Write, prefix: Option<&str>, dist: &LengthDistribution) -> Result<()> {
    for bin in &dist.histogram {
        if let Some(p) = prefix {
            write!(out, "{p}\t")?;
        }
        writeln!(out, "{}\t{}\t{}", bin.length, bin.count, fmt6(bin.fraction))?;
    }
    Ok(())
}

fn project_all(
    graphs: &[ScriptGraph],
    kg: &KnowledgeGraph,
    max_depth: usize,
    head_fallback: bool,
) -> (Vec<NarrativeProjection>, LengthDistribution) {
    path_length_distribution(graphs, kg, ProjectionOptions { max_depth, head_fallback })
}

fn project(rec: &mut Recorder, a: &ProjectArgs) -> Result<()> {
    let graphs = read_graphs(rec, &a.graphs)?;
    let kg = read_graph(rec, &a.kg)?;
    let (results, dist) = project_all(&graphs, &kg, a.max_depth, a.head_fallback);
    write_jsonl(rec.output(a.out.as_deref())?, &results)?;
    if let Some(p) = &a.hist {
        let mut out = rec.output(Some(p))?;
        writeln!(out, "length\tcount\tfraction")?;
        write_hist(&mut out, None, &dist)?;
        out.flush()?;
    }
    rec.note("total_pairs", dist.total_pairs);
    rec.note("found_pairs", dist.found_pairs);
    rec.note("mean_length", dist.mean_length);
    Ok(())
}

fn ground(rec: &mut Recorder, a: &GroundArgs) -> Result<()> {
    let kg = read_graph(rec, &a.kg)?;
    let stop = stopwords(rec, a.stopwords.as_deref())?;
    let mut items = Vec::new();
    for (i, line) in open(rec, &a.items)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item: QaItem = serde_json::from_str(&line).with_context(|| format!("items line {}", i + 1))?;
        items.push(item);
    }
    let grounded: Vec<GroundedItem> = items.iter().map(|it| ground_item(it, &kg, &stop, a.max_ngram)).collect();
    write_jsonl(rec.output(a.out.as_deref())?, &grounded)
}

#[derive(Serialize)]
struct ItemPaths {
    id: String,
    answer: usize,
    paths: Vec<KgPath>,
}

fn paths(rec: &mut Recorder, a: &PathsArgs) -> Result<()> {
    let kg = read_graph(rec, &a.kg)?;
    let mut rows = Vec::new();
    for (i, line) in open(rec, &a.grounded)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item: GroundedItem = serde_json::from_str(&line).with_context(|| format!("grounded line {}", i + 1))?;
        for concept in item.question_concepts.iter().chain(item.answer_concepts.iter().flatten()) {
            if !kg.contains_node(concept.as_str()) {
                bail!("grounded line {}: concept {concept:?} is not a node of the graph", i + 1);
            }
        }
        for (answer, pair) in item.pairs().enumerate() {
            rows.push(ItemPaths { id: item.id.clone(), answer, paths: retrieve_paths(&pair, &kg, a.hops as usize) });
        }
    }
    write_jsonl(rec.output(a.out.as_deref())?, &rows)
}

fn transe(rec: &mut Recorder, a: &TranseArgs) -> Result<()> {
    let kg = read_graph(rec, &a.kg)?;
    let cfg = TrainConfig {
        dim: a.dim,
        margin: a.margin,
        learning_rate: a.lr,
        epochs: a.epochs,
        negatives_per_positive: a.neg,
        norm: match a.norm {
            NormArg::L1 => Norm::L1,
            NormArg::L2 => Norm::L2,
        },
        seed: a.seed,
    };
    let space = train_transe(&kg, &cfg)?;
    export_relation_matrix(&space, rec.output(a.out.as_deref())?)?;
    if let Some(p) = &a.nodes_out {
        export_node_matrix(&space, rec.output(Some(p))?)?;
    }
    let eval = match &a.eval {
        Some(p) => {
            let heldout: Vec<_> = read_graph(rec, p)?.triples().collect();
            let mut candidates = kg.nodes().to_vec();
            candidates.sort();
            Some(link_prediction_eval(&space, &heldout, &candidates)?)
        }
        None => None,
    };
    #[derive(Serialize)]
    struct Report<'a> {
        config: &'a TrainConfig,
        final_loss: f64,
        loss_history: &'a [f64],
        #[serde(skip_serializing_if = "Option::is_none")]
        link_prediction: Option<kg_probe_core::transe::LinkPredictionReport>,
    }
    let report = Report { config: &cfg, final_loss: space.final_loss, loss_history: &space.loss_history, link_prediction: eval };
    match &a.report {
        Some(p) => write_json(rec.output(Some(p))?, &report)?,
        None => rec.note("final_loss", space.final_loss),
    }
    Ok(())
}

#[derive(Serialize)]
struct TableRow<'a> {
    resource: &'a str,
    #[serde(flatten)]
    stats: GraphStats,
}

fn table1(rec: &mut Recorder, a: &Table1Args) -> Result<()> {
    let mut rows = Vec::new();
    for (name, path) in [("conceptnet", &a.cn), ("swow", &a.swow)] {
        let g = read_graph(rec, path)?;
        rows.push(TableRow { resource: name, stats: graph_stats(&g) });
    }
    let mut out = rec.output(a.out.as_deref())?;
    match a.format {
        TableFormat::Json => write_json(out, &rows)?,
        TableFormat::Tsv => {
            let opt = |x: Option<f64>| x.map_or_else(|| "NA".to_owned(), fmt6);
            writeln!(out, "resource\ttriples\tnodes\trelations\tdensity\tavg_degree\tnode_entropy")?;
            for r in &rows {
                let s = &r.stats;
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    r.resource,
                    s.n_triples,
                    s.n_nodes,
                    s.n_relations,
                    opt(s.density),
                    fmt6(s.avg_degree),
                    opt(s.node_entropy)
                )?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

fn fig4(rec: &mut Recorder, a: &Fig4Args) -> Result<()> {
    let graphs = read_graphs(rec, &a.graphs)?;
    let mut out = rec.output(a.out.as_deref())?;
    writeln!(out, "kg\tlength\tcount\tfraction")?;
    for (name, path) in [("conceptnet", &a.cn), ("swow", &a.swow)] {
        let kg = read_graph(rec, path)?;
        let (_, dist) = project_all(&graphs, &kg, a.max_depth, a.head_fallback);
        write_hist(&mut out, Some(name), &dist)?;
        rec.note(&format!("{name}_mean_length"), dist.mean_length);
        rec.note(&format!("{name}_coverage"), dist.coverage);
    }
    out.flush()?;
    Ok(())
}
