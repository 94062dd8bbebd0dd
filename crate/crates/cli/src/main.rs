//! `kg-probe`: command-line front end for the knowledge-graph analysis
//! toolkit. Every successful run writes a JSON manifest next to its outputs.

mod commands;
mod io;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "kg-probe", version, about = "Structural and coverage analysis of commonsense knowledge graphs")]
pub struct Cli {
    /// Where to write the run manifest (default: next to the first output).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Parse a ConceptNet dump, a SWOW export or a canonical TSV into canonical TSV.
    Ingest(IngestArgs),
    /// Size, density, average degree and node entropy of a graph.
    Stats(StatsArgs),
    /// Node and edge overlap between two graphs.
    Overlap(OverlapArgs),
    /// Per-relation frequency and recall in the intersection with another graph.
    Relrecall(RelrecallArgs),
    /// Share of edges touching a negation marker.
    Negation(NegationArgs),
    /// Tag distribution over annotated nodes.
    Annodist(AnnodistArgs),
    /// Corpus frequency coverage of graph nodes.
    Corpusfreq(CorpusfreqArgs),
    /// Build script graphs from SRL-annotated narratives.
    Scriptgraph(ScriptgraphArgs),
    /// Project script-graph edges onto a graph as shortest paths.
    Project(ProjectArgs),
    /// Ground QA items in graph concepts.
    Ground(GroundArgs),
    /// Retrieve question-to-answer paths for grounded items.
    Paths(PathsArgs),
    /// Conflate relation labels by a merge scheme.
    Merge(MergeArgs),
    /// Add a reversed relation for every edge.
    Densify(DensifyArgs),
    /// Train TransE and export the relation matrix.
    Transe(TranseArgs),
    /// Statistics table for ConceptNet and SWOW.
    Table1(Table1Args),
    /// Relation frequency and recall of ConceptNet within SWOW.
    Fig3(Fig3Args),
    /// Shortest path length distributions of script graphs on both graphs.
    Fig4(Fig4Args),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Stats(_) => "stats",
            Command::Overlap(_) => "overlap",
            Command::Relrecall(_) => "relrecall",
            Command::Negation(_) => "negation",
            Command::Annodist(_) => "annodist",
            Command::Corpusfreq(_) => "corpusfreq",
            Command::Scriptgraph(_) => "scriptgraph",
            Command::Project(_) => "project",
            Command::Ground(_) => "ground",
            Command::Paths(_) => "paths",
            Command::Merge(_) => "merge",
            Command::Densify(_) => "densify",
            Command::Transe(_) => "transe",
            Command::Table1(_) => "table1",
            Command::Fig3(_) => "fig3",
            Command::Fig4(_) => "fig4",
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Conceptnet,
    Swow,
    Canonical,
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    #[arg(long, value_enum)]
    pub format: InputFormat,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Minimum summed SWOW frequency for a cue-response pair.
    #[arg(long, default_value_t = 1)]
    pub min_freq: u64,
    /// Keep the single SWOW "association" relation instead of forward/mutual labels.
    #[arg(long)]
    pub no_label: bool,
    /// Ingest report JSON (default: standard error).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct StatsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct OverlapArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the intersection graph (edges of A linked in B) as TSV.
    #[arg(long)]
    pub intersection: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct RelrecallArgs {
    #[arg(long)]
    pub full: PathBuf,
    #[arg(long)]
    pub other: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchModeArg {
    Token,
    Substring,
}

#[derive(Debug, Args, Serialize)]
pub struct NegationArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// One marker per line (default: the bundled list).
    #[arg(long)]
    pub markers: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "token")]
    pub mode: MatchModeArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct AnnodistArgs {
    /// `concept<TAB>tag` file.
    #[arg(long)]
    pub annotations: PathBuf,
    /// Restrict to annotated concepts that are nodes of this graph.
    #[arg(long)]
    pub kg: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub top_k: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CorpusfreqArgs {
    #[arg(long)]
    pub kg: PathBuf,
    /// `phrase<TAB>count` file.
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ScriptgraphArgs {
    /// Narratives with SRL frames, one JSON object per line.
    #[arg(long)]
    pub srl: PathBuf,
    /// One stopword per line (default: the bundled list).
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// `form<TAB>lemma` overrides.
    #[arg(long)]
    pub lemmas: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ProjectArgs {
    #[arg(long)]
    pub graphs: PathBuf,
    #[arg(long)]
    pub kg: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Path length histogram TSV.
    #[arg(long)]
    pub hist: Option<PathBuf>,
    #[arg(long, default_value_t = kg_probe_core::projection::DEFAULT_MAX_DEPTH)]
    pub max_depth: usize,
    /// Retry unmatched multiword spans with their last token.
    #[arg(long)]
    pub head_fallback: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct GroundArgs {
    #[arg(long)]
    pub kg: PathBuf,
    #[arg(long)]
    pub items: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub max_ngram: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct PathsArgs {
    #[arg(long)]
    pub kg: PathBuf,
    #[arg(long)]
    pub grounded: PathBuf,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub hops: u8,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct MergeArgs {
    #[arg(long)]
    pub kg: PathBuf,
    /// 17, 7, 1 or none.
    #[arg(long)]
    pub scheme: kg_probe_core::merge::SchemeName,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DensifyArgs {
    #[arg(long)]
    pub kg: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormArg {
    L1,
    L2,
}

#[derive(Debug, Args, Serialize)]
pub struct TranseArgs {
    #[arg(long)]
    pub kg: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub margin: f64,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1)]
    pub neg: usize,
    #[arg(long, value_enum, default_value = "l2")]
    pub norm: NormArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relation matrix TSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Training report JSON (loss history, final loss).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also export node vectors.
    #[arg(long)]
    pub nodes_out: Option<PathBuf>,
    /// Held-out triples (canonical TSV) for link-prediction evaluation.
    #[arg(long)]
    pub eval: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Tsv,
    Json,
}

#[derive(Debug, Args, Serialize)]
pub struct Table1Args {
    #[arg(long, default_value = "cn.tsv")]
    pub cn: PathBuf,
    #[arg(long, default_value = "swow.tsv")]
    pub swow: PathBuf,
    #[arg(long, value_enum, default_value = "tsv")]
    pub format: TableFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct Fig3Args {
    #[arg(long, default_value = "cn.tsv")]
    pub cn: PathBuf,
    #[arg(long, default_value = "swow.tsv")]
    pub swow: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct Fig4Args {
    #[arg(long, default_value = "script_graphs.jsonl")]
    pub graphs: PathBuf,
    #[arg(long, default_value = "cn.tsv")]
    pub cn: PathBuf,
    #[arg(long, default_value = "swow.tsv")]
    pub swow: PathBuf,
    #[arg(long, default_value_t = kg_probe_core::projection::DEFAULT_MAX_DEPTH)]
    pub max_depth: usize,
    #[arg(long)]
    pub head_fallback: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size thread pool: {e}");
        }
    }
    match commands::run(&cli.command, cli.manifest.as_deref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
