use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use kgspec::eval::{mean_by_point, precision_at_k, sensitivity_sweep, write_sweep_csv, GroundTruth, Recommender, SweepAxis};
use kgspec::graph::{
    load_ntriples, parse_tsv_edges, read_snapshot, write_ntriples, write_snapshot, ParseMode, ParseOptions, RDF_TYPE,
    SNAPSHOT_MAGIC,
};
use kgspec::pagerank::{compute_pagerank, load_scores, write_scores};
use kgspec::skipgram::{read_sentences, read_word2vec, train, write_word2vec};
use kgspec::specificity::{
    rank_by_specificity, read_table_tsv, relevance_report, write_table_tsv, Method, SpecificityTable, TableMeta,
};
use kgspec::walks::{corpus_stats, extract_corpus, write_corpus, write_stats_csv, Bias, Pruning, WalkCorpus, WalkStrategy};
use kgspec::{Graph, TermId};
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::meta::{read_sidecar, write_sidecar, Metadata};
use crate::synth::{self, FranchiseParams};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(e) => write!(f, "error: {e:#}"),
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Data(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Parser, Debug)]
#[command(name = "kgspec", version, about = "Specificity-biased graph walks, embeddings and entity recommendation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Base seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON pipeline config; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all processors). Use 1 for bit-identical training.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse N-Triples (optionally gzipped) or a 4-column TSV into a snapshot.
    Ingest(IngestArgs),
    /// Compute PageRank scores over resource nodes.
    Pagerank(PagerankArgs),
    /// Rank relationship templates by specificity to a type.
    Specificity(SpecificityArgs),
    /// Extract a walk corpus.
    Walk(WalkArgs),
    /// Train skip-gram embeddings on walk corpora.
    Train(TrainArgs),
    /// Top-k most similar entities to a query.
    Recommend(RecommendArgs),
    /// Precision@k against a ground-truth file.
    Eval(EvalArgs),
    /// NDCG of specificity tables across N_walks or |S|.
    Sensitivity(SensitivityArgs),
    /// Generate a synthetic graph.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Abort on the first malformed line.
    #[arg(long)]
    pub strict: bool,
    /// Predicate used as rdf:type.
    #[arg(long)]
    pub type_predicate: Option<String>,
    /// Also write the graph back as sorted N-Triples.
    #[arg(long)]
    pub ntriples_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PagerankArgs {
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub damping: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SpecificityArgs {
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Target type IRI.
    #[arg(long = "type")]
    pub type_iri: Option<String>,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub seed_set_size: Option<usize>,
    #[arg(long)]
    pub n_walks: Option<usize>,
    /// Candidates kept per unit of depth.
    #[arg(long)]
    pub candidates: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Extra forward attempts when a forward walk dead-ends.
    #[arg(long)]
    pub retry_limit: Option<usize>,
    /// Exhaustive path counting instead of random walks.
    #[arg(long)]
    pub exact: bool,
    /// Also write specificity, PageRank and frequency per template.
    #[arg(long)]
    pub compare_metrics: Option<PathBuf>,
    /// Score file for the PageRank column of --compare-metrics.
    #[arg(long)]
    pub pagerank: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum BiasArg {
    Uniform,
    Frequency,
    Pagerank,
    Specificity,
}

impl From<BiasArg> for Bias {
    fn from(b: BiasArg) -> Self {
        match b {
            BiasArg::Uniform => Bias::Uniform,
            BiasArg::Frequency => Bias::Frequency,
            BiasArg::Pagerank => Bias::PageRank,
            BiasArg::Specificity => Bias::Specificity,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum PruningArg {
    None,
    Nrse,
    Ue,
    Nrst,
    Uet,
}

impl From<PruningArg> for Pruning {
    fn from(p: PruningArg) -> Self {
        match p {
            PruningArg::None => Pruning::None,
            PruningArg::Nrse => Pruning::Nrse,
            PruningArg::Ue => Pruning::Ue,
            PruningArg::Nrst => Pruning::Nrst,
            PruningArg::Uet => Pruning::Uet,
        }
    }
}

#[derive(Args, Debug)]
pub struct WalkArgs {
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Walk from every instance of this type.
    #[arg(long = "type")]
    pub type_iri: Option<String>,
    /// Walk from the IRIs listed in this file, one per line.
    #[arg(long)]
    pub entities: Option<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
    /// Per-entity statistics CSV.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub bias: Option<BiasArg>,
    #[arg(long, value_enum)]
    pub pruning: Option<PruningArg>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub walks_per_entity: Option<usize>,
    /// Specificity table (TSV with its .meta.json sidecar).
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// PageRank score TSV.
    #[arg(long)]
    pub pagerank: Option<PathBuf>,
    /// Do not prepend depth-1 walks to a deeper corpus.
    #[arg(long)]
    pub no_depth1: bool,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub corpus: Vec<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub negatives: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub min_count: Option<u64>,
    #[arg(long)]
    pub subsample: Option<f64>,
}

#[derive(Args, Debug)]
pub struct RecommendArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, required = true, num_args = 1..)]
    pub query: Vec<String>,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Restrict results to instances of --type in this graph.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long = "type")]
    pub type_iri: Option<String>,
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// JSON map of query IRI to relevant IRIs.
    #[arg(long)]
    pub truth: PathBuf,
    /// Fixed k; defaults to each query's truth-set size.
    #[arg(long)]
    pub k: Option<usize>,
    /// Permit k different from the truth-set size.
    #[arg(long)]
    pub allow_mismatch: bool,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long = "type")]
    pub type_iri: Option<String>,
    /// Scheme label for the CSV rows.
    #[arg(long, default_value = "model")]
    pub scheme: String,
    /// Walk depth label for the CSV rows.
    #[arg(long, default_value_t = 0)]
    pub depth: usize,
    #[arg(long)]
    pub output: PathBuf,
    /// Add rows to an existing CSV instead of replacing it.
    #[arg(long)]
    pub append: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum AxisArg {
    NWalks,
    SeedSetSize,
}

#[derive(Args, Debug)]
pub struct SensitivityArgs {
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long = "type")]
    pub type_iri: Option<String>,
    #[arg(long, value_enum)]
    pub axis: AxisArg,
    /// Comma-separated sweep values; `all` means every instance of the type.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<String>,
    /// Number of seeds, starting at --seed.
    #[arg(long, default_value_t = 20)]
    pub runs: u64,
    #[arg(long)]
    pub n_walks: Option<usize>,
    #[arg(long)]
    pub seed_set_size: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum SynthKind {
    Chain,
    Planted,
    Table1,
    Franchise,
    Dense,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: SynthKind,
    /// N-Triples output.
    #[arg(long)]
    pub output: PathBuf,
    /// Ground-truth JSON (franchise only).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Size multiplier for the planted graph.
    #[arg(long, default_value_t = 3)]
    pub scale: usize,
    #[arg(long, default_value_t = 5)]
    pub franchises: usize,
    #[arg(long, default_value_t = 4)]
    pub films_per: usize,
    #[arg(long, default_value_t = 30)]
    pub distractors: usize,
    #[arg(long, default_value_t = 120)]
    pub books: usize,
    /// Node count for the dense fixture.
    #[arg(long, default_value_t = 6)]
    pub nodes: usize,
}

/// Effective configuration: file, then flags.
pub fn base_config(global: &GlobalArgs) -> CliResult<PipelineConfig> {
    let mut cfg = match &global.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = global.seed {
        cfg.seed = s;
    }
    if global.workers.is_some() {
        cfg.workers = global.workers;
    }
    if cfg.workers == Some(0) {
        return Err(usage("--workers must be at least 1"));
    }
    cfg.estimator.seed = cfg.seed;
    cfg.train.seed = cfg.seed;
    cfg.train.workers = cfg.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    Ok(cfg)
}

pub fn run(cli: Cli) -> CliResult<()> {
    let mut cfg = base_config(&cli.global)?;
    if let Some(n) = cfg.workers {
        // Ignore the error when a pool already exists (repeated calls in tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Ingest(a) => ingest(&cfg, a),
        Command::Pagerank(a) => pagerank(&mut cfg, a),
        Command::Specificity(a) => specificity(&mut cfg, a),
        Command::Walk(a) => walk(&mut cfg, a),
        Command::Train(a) => train_cmd(&mut cfg, a),
        Command::Recommend(a) => recommend(&cfg, a),
        Command::Eval(a) => eval(&mut cfg, a),
        Command::Sensitivity(a) => sensitivity(&mut cfg, a),
        Command::Synth(a) => synth_cmd(&cfg, a),
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

/// Snapshot, TSV (by extension) or N-Triples, optionally gzipped.
pub fn load_graph(path: &Path) -> CliResult<Graph> {
    let mut magic = [0u8; 8];
    let is_snapshot = File::open(path)
        .and_then(|mut f| f.read_exact(&mut magic))
        .map(|_| &magic == SNAPSHOT_MAGIC)
        .unwrap_or(false);
    if is_snapshot {
        return Ok(read_snapshot(open(path)?).with_context(|| format!("reading snapshot {}", path.display()))?);
    }
    let name = path.to_string_lossy();
    if name.ends_with(".tsv") {
        return Ok(parse_tsv_edges(open(path)?, RDF_TYPE)?);
    }
    let (g, report) = load_ntriples(path, &ParseOptions::default()).with_context(|| format!("loading {}", path.display()))?;
    if report.skipped > 0 {
        log::warn!("{}: skipped {} malformed lines", path.display(), report.skipped);
    }
    Ok(g)
}

fn graph_path(cfg: &PipelineConfig, flag: &Option<PathBuf>) -> CliResult<PathBuf> {
    flag.clone().or_else(|| cfg.graph.clone()).ok_or_else(|| usage("--graph is required"))
}

fn type_id(g: &Graph, cfg: &PipelineConfig, flag: &Option<String>) -> CliResult<TermId> {
    let iri = flag.clone().or_else(|| cfg.type_iri.clone()).ok_or_else(|| usage("--type is required"))?;
    let iri = iri.trim_start_matches('<').trim_end_matches('>');
    match g.lookup(iri) {
        Some(t) if g.type_count(t) > 0 => Ok(t),
        _ => Err(CliError::Data(anyhow!("type {iri} has no instances in the graph"))),
    }
}

#[derive(Serialize)]
struct IngestSummary {
    triples: usize,
    entities: usize,
    types: usize,
    parsed_lines: u64,
    duplicates: u64,
    skipped: u64,
}

fn ingest(cfg: &PipelineConfig, a: IngestArgs) -> CliResult<()> {
    let type_iri = a.type_predicate.clone().unwrap_or_else(|| RDF_TYPE.to_string());
    let name = a.input.to_string_lossy();
    let (g, parsed, duplicates, skipped) = if name.ends_with(".tsv") {
        let g = parse_tsv_edges(open(&a.input)?, &type_iri)?;
        let n = g.num_triples() as u64;
        (g, n, 0, 0)
    } else {
        let opts = ParseOptions {
            mode: if a.strict { ParseMode::Strict } else { ParseMode::Lenient },
            type_iri: type_iri.clone(),
            ..Default::default()
        };
        let (g, report) = load_ntriples(&a.input, &opts).with_context(|| format!("loading {}", a.input.display()))?;
        for e in report.errors.iter().take(10) {
            log::warn!("line {}: {}", e.line, e.message);
        }
        (g, report.parsed, report.duplicates, report.skipped)
    };
    let mut out = create(&a.output)?;
    write_snapshot(&g, &mut out)?;
    out.flush()?;
    if let Some(nt) = &a.ntriples_out {
        write_ntriples(&g, create(nt)?)?;
    }
    let summary = IngestSummary {
        triples: g.num_triples(),
        entities: g.num_resources(),
        types: g.types().len(),
        parsed_lines: parsed,
        duplicates,
        skipped,
    };
    println!(
        "triples {} entities {} types {} skipped {}",
        summary.triples, summary.entities, summary.types, summary.skipped
    );
    let meta = Metadata::new("ingest", cfg.seed, PipelineConfig::hash_of(&type_iri), Some(g.checksum()));
    write_sidecar(&a.output, &meta.with_details(&summary))?;
    Ok(())
}

fn pagerank(cfg: &mut PipelineConfig, a: PagerankArgs) -> CliResult<()> {
    let g = load_graph(&graph_path(cfg, &a.graph)?)?;
    let pr = &mut cfg.pagerank;
    if let Some(d) = a.damping {
        pr.damping = d;
    }
    if let Some(e) = a.epsilon {
        pr.epsilon = e;
    }
    if let Some(m) = a.max_iters {
        pr.max_iters = m;
    }
    let result = compute_pagerank(&g, pr.damping, pr.epsilon, pr.max_iters).map_err(|e| match e {
        kgspec::Error::InvalidParam(m) if m.contains("damping") => usage(m),
        e => e.into(),
    })?;
    if !result.converged {
        log::warn!("PageRank stopped after {} iterations without converging", result.iterations);
    }
    write_scores(&g, &result.scores, create(&a.output)?)?;
    println!("scored {} nodes in {} iterations", result.scores.len(), result.iterations);
    let meta = Metadata::new("pagerank", cfg.seed, PipelineConfig::hash_of(&cfg.pagerank), Some(g.checksum()))
        .with_details(&serde_json::json!({ "iterations": result.iterations, "converged": result.converged }));
    write_sidecar(&a.output, &meta)?;
    Ok(())
}

fn specificity(cfg: &mut PipelineConfig, a: SpecificityArgs) -> CliResult<()> {
    let g = load_graph(&graph_path(cfg, &a.graph)?)?;
    let t = type_id(&g, cfg, &a.type_iri)?;
    let p = &mut cfg.estimator;
    if let Some(v) = a.seed_set_size {
        p.seed_set_size = v;
    }
    if let Some(v) = a.n_walks {
        p.n_walks = v;
    }
    if let Some(v) = a.candidates {
        p.candidates_per_depth = v;
    }
    if let Some(v) = a.max_depth {
        p.max_depth = v;
    }
    if let Some(v) = a.threshold {
        p.threshold = v;
    }
    if let Some(v) = a.retry_limit {
        p.forward_retry_limit = v;
    }
    if a.exact {
        p.method = Method::Eq2;
    }
    p.validate().map_err(|e| usage(e.to_string()))?;
    let mut table = rank_by_specificity(&g, t, p)?;
    let checksum = g.checksum();
    table.meta.graph_checksum = Some(checksum.clone());
    write_table_tsv(&g, &table, create(&a.output)?)?;
    for (i, entries) in table.depths.iter().enumerate() {
        let above = entries.iter().filter(|e| e.score >= table.meta.params.threshold).count();
        println!("depth {}: {} templates, {} above threshold", i + 1, entries.len(), above);
    }
    let meta = Metadata::new("specificity", cfg.seed, PipelineConfig::hash_of(&cfg.estimator), Some(checksum))
        .with_details(&table.meta);
    write_sidecar(&a.output, &meta)?;

    if let Some(path) = &a.compare_metrics {
        let scores = match &a.pagerank {
            Some(p) => Some(load_scores(open(p)?, ParseMode::Lenient)?.join(&g).0),
            None => None,
        };
        let entries: Vec<_> = table.depths.iter().flatten().cloned().collect();
        let rows = relevance_report(&g, t, &entries, scores.as_ref(), 25)?;
        let mut out = create(path)?;
        writeln!(out, "relationship\tspecificity\tpagerank\tfrequency")?;
        for r in rows {
            let pr = r.pagerank.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"));
            writeln!(out, "{}\t{:.6}\t{}\t{}", r.relationship.render(&g), r.specificity, pr, r.frequency)?;
        }
        out.flush()?;
    }
    Ok(())
}

fn read_table(g: &Graph, path: &Path) -> CliResult<SpecificityTable> {
    let meta = read_sidecar(path)?;
    let table_meta: TableMeta = serde_json::from_value(meta.details.clone())
        .with_context(|| format!("{}: sidecar has no table metadata", path.display()))?;
    if let (Some(a), Some(b)) = (&table_meta.graph_checksum, Some(g.checksum())) {
        if *a != b {
            log::warn!("{} was computed on a different graph", path.display());
        }
    }
    Ok(read_table_tsv(g, open(path)?, table_meta)?)
}

fn entity_list(g: &Graph, cfg: &PipelineConfig, a: &WalkArgs) -> CliResult<Vec<TermId>> {
    match (&a.entities, a.type_iri.as_ref().or(cfg.type_iri.as_ref())) {
        (Some(path), _) => {
            let mut out = Vec::new();
            for line in open(path)?.lines() {
                let line = line?;
                let iri = line.trim().trim_start_matches('<').trim_end_matches('>');
                if iri.is_empty() || iri.starts_with('#') {
                    continue;
                }
                out.push(g.lookup(iri).ok_or_else(|| anyhow!("entity {iri} not in graph"))?);
            }
            Ok(out)
        }
        (None, Some(_)) => Ok(g.entities_of_type(type_id(g, cfg, &a.type_iri)?)),
        (None, None) => Err(usage("walk needs --type or --entities")),
    }
}

fn walk(cfg: &mut PipelineConfig, a: WalkArgs) -> CliResult<()> {
    let w = &mut cfg.walk;
    if let Some(b) = a.bias {
        w.bias = b.into();
    }
    if let Some(p) = a.pruning {
        w.pruning = p.into();
    }
    if let Some(d) = a.depth {
        w.depth = d;
    }
    if let Some(n) = a.walks_per_entity {
        w.walks_per_entity = n;
    }
    if a.no_depth1 {
        w.with_depth1 = false;
    }
    if w.depth == 0 {
        return Err(usage("--depth must be at least 1"));
    }
    if w.bias == Bias::Specificity && a.table.is_none() {
        return Err(usage("--bias specificity requires --table"));
    }
    if w.bias == Bias::PageRank && a.pagerank.is_none() {
        return Err(usage("--bias pagerank requires --pagerank"));
    }
    let w = w.clone();
    let g = load_graph(&graph_path(cfg, &a.graph)?)?;
    let table = match (&a.table, w.bias) {
        (Some(p), Bias::Specificity) => Some(read_table(&g, p)?),
        _ => None,
    };
    let scores = match (&a.pagerank, w.bias) {
        (Some(p), Bias::PageRank) => Some(load_scores(open(p)?, ParseMode::Lenient)?.join(&g).0),
        _ => None,
    };
    let entities = entity_list(&g, cfg, &a)?;

    let strategy_at = |depth: usize| {
        let mut s = WalkStrategy::new(w.bias, depth, w.walks_per_entity).with_pruning(w.pruning);
        if let Some(t) = &table {
            s = s.with_table(t);
        }
        if let Some(p) = &scores {
            s = s.with_pagerank(p);
        }
        s
    };
    let mut corpus = WalkCorpus::default();
    if w.with_depth1 && w.depth > 1 {
        corpus.append(extract_corpus(&g, &entities, &strategy_at(1), cfg.seed)?);
    }
    corpus.append(extract_corpus(&g, &entities, &strategy_at(w.depth), cfg.seed)?);

    let checksum = g.checksum();
    let header = format!(
        "kgspec walks bias={} pruning={} depth={} walks_per_entity={} with_depth1={} seed={} graph={}",
        w.bias.label(),
        w.pruning.label(),
        w.depth,
        w.walks_per_entity,
        w.with_depth1,
        cfg.seed,
        checksum
    );
    write_corpus(&g, &corpus.walks, &header, create(&a.output)?)?;
    if let Some(path) = &a.stats {
        write_stats_csv(&g, &corpus.entities, create(path)?)?;
    }
    let stats = corpus_stats(&corpus);
    if corpus.is_empty() {
        log::warn!("no walks generated for {} entities at depth {}", entities.len(), w.depth);
        eprintln!("warning: empty corpus");
    }
    println!(
        "{} walks ({} distinct) from {} entities, {} attempts",
        stats.walks,
        stats.distinct,
        entities.len(),
        stats.attempts
    );
    let meta = Metadata::new("walk", cfg.seed, PipelineConfig::hash_of(&w), Some(checksum)).with_details(
        &serde_json::json!({ "walks": stats.walks, "distinct": stats.distinct, "attempts": stats.attempts,
                             "entities": entities.len(), "mean_depth": stats.mean_depth }),
    );
    write_sidecar(&a.output, &meta)?;
    Ok(())
}

fn train_cmd(cfg: &mut PipelineConfig, a: TrainArgs) -> CliResult<()> {
    let t = &mut cfg.train;
    if let Some(v) = a.dim {
        t.dim = v;
    }
    if let Some(v) = a.window {
        t.window = v;
    }
    if let Some(v) = a.negatives {
        t.negatives = v;
    }
    if let Some(v) = a.epochs {
        t.epochs = v;
    }
    if let Some(v) = a.learning_rate {
        t.learning_rate = v;
    }
    if let Some(v) = a.min_count {
        t.min_count = v;
    }
    if let Some(v) = a.subsample {
        t.subsample = v;
    }
    t.validate().map_err(|e| usage(e.to_string()))?;
    let mut sentences = Vec::new();
    for path in &a.corpus {
        sentences.extend(read_sentences(open(path)?)?);
    }
    let (model, report) = train(&sentences, t)?;
    write_word2vec(&model, create(&a.output)?)?;
    for (i, loss) in report.epoch_loss.iter().enumerate() {
        println!("epoch {} loss {:.6}", i + 1, loss);
    }
    println!("{} tokens x {} dims", model.len(), model.dim);
    let meta = Metadata::new("train", cfg.seed, PipelineConfig::hash_of(&cfg.train), None).with_details(&report);
    write_sidecar(&a.output, &meta)?;
    Ok(())
}

fn candidate_filter(
    cfg: &PipelineConfig,
    graph: &Option<PathBuf>,
    type_iri: &Option<String>,
) -> CliResult<Option<HashSet<String>>> {
    if graph.is_none() && type_iri.is_none() {
        return Ok(None);
    }
    let g = load_graph(&graph_path(cfg, graph)?)?;
    let t = type_id(&g, cfg, type_iri)?;
    Ok(Some(g.entities_of_type(t).into_iter().map(|e| g.render_token(e)).collect()))
}

fn recommend(cfg: &PipelineConfig, a: RecommendArgs) -> CliResult<()> {
    if a.k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    let model = read_word2vec(open(&a.model)?)?;
    let filter = candidate_filter(cfg, &a.graph, &a.type_iri)?;
    let rec = Recommender::new(&model);
    let mut out: Box<dyn Write> = match &a.output {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(out, "query,rank,token,score")?;
    for q in &a.query {
        let r = rec.top_k(q, a.k, filter.as_ref())?;
        for (i, (tok, score)) in r.items.iter().enumerate() {
            writeln!(out, "{},{},{},{:.6}", q, i + 1, tok, score)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn eval(cfg: &mut PipelineConfig, a: EvalArgs) -> CliResult<()> {
    if a.k.is_some() {
        cfg.eval.k = a.k;
    }
    if a.allow_mismatch {
        cfg.eval.allow_mismatch = true;
    }
    let truth = GroundTruth::from_json(open(&a.truth)?)?;
    if let Some(k) = cfg.eval.k {
        if k == 0 {
            return Err(usage("--k must be at least 1"));
        }
        if !cfg.eval.allow_mismatch {
            if let Some((q, rel)) = truth.0.iter().find(|(_, rel)| rel.len() != k) {
                return Err(usage(format!(
                    "k = {k} but query {q} has {} relevant items; pass --allow-mismatch to override",
                    rel.len()
                )));
            }
        }
    }
    let model = read_word2vec(open(&a.model)?)?;
    let filter = candidate_filter(cfg, &a.graph, &a.type_iri)?;
    let rec = Recommender::new(&model);

    let exists = a.append && a.output.exists();
    let mut out = if exists {
        BufWriter::new(std::fs::OpenOptions::new().append(true).open(&a.output)?)
    } else {
        create(&a.output)?
    };
    if !exists {
        writeln!(out, "scheme,depth,query,k,precision")?;
    }
    let mut total = 0.0;
    for (q, rel) in &truth.0 {
        let k = cfg.eval.k.unwrap_or(rel.len()).max(1);
        let r = rec.top_k(q, k, filter.as_ref())?;
        let p = precision_at_k(&r, rel);
        total += p;
        writeln!(out, "{},{},{},{},{:.6}", a.scheme, a.depth, q, k, p)?;
    }
    out.flush()?;
    let mean = if truth.0.is_empty() { 0.0 } else { total / truth.0.len() as f64 };
    println!("{} depth {}: mean precision {:.4} over {} queries", a.scheme, a.depth, mean, truth.0.len());
    if !exists {
        let meta = Metadata::new("eval", cfg.seed, PipelineConfig::hash_of(&cfg.eval), None)
            .with_details(&serde_json::json!({ "scheme": a.scheme, "depth": a.depth, "mean_precision": mean }));
        write_sidecar(&a.output, &meta)?;
    }
    Ok(())
}

fn sensitivity(cfg: &mut PipelineConfig, a: SensitivityArgs) -> CliResult<()> {
    let g = load_graph(&graph_path(cfg, &a.graph)?)?;
    let t = type_id(&g, cfg, &a.type_iri)?;
    let p = &mut cfg.estimator;
    if let Some(v) = a.n_walks {
        p.n_walks = v;
    }
    if let Some(v) = a.seed_set_size {
        p.seed_set_size = v;
    }
    if let Some(v) = a.max_depth {
        p.max_depth = v;
    }
    let all = g.type_count(t);
    let values = a
        .values
        .iter()
        .map(|v| match v.trim() {
            "all" => Ok(all),
            s => s.parse::<usize>().map_err(|_| usage(format!("bad sweep value {s:?}"))),
        })
        .collect::<CliResult<Vec<usize>>>()?;
    if values.is_empty() || values.contains(&0) {
        return Err(usage("sweep values must be positive"));
    }
    if a.runs == 0 {
        return Err(usage("--runs must be at least 1"));
    }
    let axis = match a.axis {
        AxisArg::NWalks => SweepAxis::NWalks,
        AxisArg::SeedSetSize => SweepAxis::SeedSetSize,
    };
    let seeds: Vec<u64> = (0..a.runs).map(|i| cfg.seed + i).collect();
    let rows = sensitivity_sweep(&g, t, p, axis, &values, &seeds)?;
    let points = mean_by_point(&rows);
    write_sweep_csv(axis, &points, create(&a.output)?)?;
    for pt in &points {
        println!("{}={} depth {}: ndcg {:.4}", axis.label(), pt.value, pt.depth, pt.mean);
    }
    let meta = Metadata::new("sensitivity", cfg.seed, PipelineConfig::hash_of(&cfg.estimator), Some(g.checksum()))
        .with_details(&serde_json::json!({ "axis": axis.label(), "values": values, "runs": a.runs }));
    write_sidecar(&a.output, &meta)?;
    Ok(())
}

fn synth_cmd(cfg: &PipelineConfig, a: SynthArgs) -> CliResult<()> {
    let syn = match a.kind {
        SynthKind::Chain => synth::chain(),
        SynthKind::Planted => {
            if a.scale == 0 {
                return Err(usage("--scale must be at least 1"));
            }
            synth::planted_specificity(a.scale, cfg.seed)
        }
        SynthKind::Table1 => synth::table1(),
        SynthKind::Franchise => {
            if a.franchises == 0 || a.films_per < 2 {
                return Err(usage("need at least one franchise of two films"));
            }
            synth::franchise(FranchiseParams {
                franchises: a.franchises,
                films_per: a.films_per,
                distractor_films: a.distractors,
                books: a.books,
                seed: cfg.seed,
            })
        }
        SynthKind::Dense => synth::dense_same_type(a.nodes.max(2)),
    };
    write_ntriples(&syn.graph, create(&a.output)?)?;
    if let Some(path) = &a.truth {
        let truth = syn.truth.as_ref().ok_or_else(|| usage("--truth is only available for --kind franchise"))?;
        let mut out = create(path)?;
        serde_json::to_writer_pretty(&mut out, truth)?;
        writeln!(out)?;
        out.flush()?;
    }
    println!("type {}", syn.type_iri);
    println!("triples {}", syn.graph.num_triples());
    let meta = Metadata::new(
        "synth",
        cfg.seed,
        PipelineConfig::hash_of(&format!("{:?} {} {} {} {} {} {}", a.kind, a.scale, a.franchises, a.films_per, a.distractors, a.books, a.nodes)),
        Some(syn.graph.checksum()),
    )
    .with_details(&serde_json::json!({ "type_iri": syn.type_iri }));
    write_sidecar(&a.output, &meta)?;
    Ok(())
}
