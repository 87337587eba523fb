//! `medfacet`: vocabulary checks, ingestion, extraction debugging, search
//! and the HTTP server behind one binary.
//!
//! Exit status: 0 success, 1 fatal error, 2 partial success (the command
//! finished but skipped or dropped some input).

use std::fmt::Display;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use medfacet_core::drugs::DrugIndexer;
use medfacet_core::genes::{
    ContextLexicon, DisambiguationRequest, Disambiguator, GeneIndexer, NullOracle, OracleError,
    TableOracle, Verdict,
};
use medfacet_core::index::{FacetIndex, FacetQuery, FacetResult, IndexStore};
use medfacet_core::pipeline::{self, Enricher, PipelineConfig, PipelineError};
use medfacet_core::record::PubMedRecord;
use medfacet_core::vocab::{DrugVocabulary, GeneVocabulary, VocabError};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "medfacet", version, about = "Faceted literature catalogue for drug repurposing")]
struct Cli {
    /// More diagnostics on stderr (repeat for debug output).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Vocabulary maintenance.
    #[command(subcommand)]
    Vocab(VocabCommand),
    /// Run the extract/transform/load pipeline; prints the run report as JSON.
    Ingest(IngestArgs),
    /// Run the drug and gene indexers on one record or text and show the matches.
    Extract(ExtractArgs),
    /// Query an index.
    Search(SearchArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
    /// Re-adjudicate gene candidates dropped by earlier runs.
    Replay(ReplayArgs),
}

#[derive(Subcommand)]
enum VocabCommand {
    /// Check a drug and a gene vocabulary; exit 1 when either has errors.
    Validate {
        drugs: PathBuf,
        genes: PathBuf,
        /// Print the reports as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Mode {
    /// Initial load of every batch in the archive.
    #[arg(long)]
    full: bool,
    /// Process only the batches after the checkpoint.
    #[arg(long)]
    incremental: bool,
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    mode: Mode,
    /// Pipeline configuration (TOML).
    #[arg(long, env = "MEDFACET_CONFIG")]
    config: PathBuf,
    /// Overrides `workers` from the configuration.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ExtractArgs {
    /// Re-extract a record stored in the index named by --config.
    #[arg(long, conflicts_with = "text", required_unless_present = "text")]
    pmid: Option<u64>,
    /// File holding the text to analyse (`-` reads stdin). The first line is
    /// taken as the title, the rest as the abstract.
    #[arg(long)]
    text: Option<PathBuf>,
    /// Pipeline configuration supplying vocabularies, lexicon, oracle and index.
    #[arg(long, env = "MEDFACET_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    drugs: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    genes: Option<PathBuf>,
    /// Verdict table (`digest<TAB>verdict`) used as the disambiguation oracle.
    #[arg(long)]
    oracle_table: Option<PathBuf>,
    /// Log the gating decisions and every oracle call on stderr.
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct IndexSource {
    /// Index directory.
    #[arg(long, env = "MEDFACET_INDEX", conflicts_with = "config")]
    index: Option<PathBuf>,
    /// Pipeline configuration; its `index` setting is used.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl IndexSource {
    fn path(&self) -> Result<PathBuf, Failure> {
        match (&self.index, &self.config) {
            (Some(p), _) => Ok(p.clone()),
            (None, Some(c)) => Ok(PipelineConfig::load(c).map_err(|e| Failure::new("config", e))?.index),
            (None, None) => Err(Failure::new("usage", "one of --index or --config is required")),
        }
    }

    fn open(&self) -> Result<FacetIndex, Failure> {
        let path = self.path()?;
        IndexStore::new(&path)
            .load_existing()
            .map_err(|e| Failure::new("index", e))
    }
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    source: IndexSource,
    /// Words that must all occur in title or abstract.
    #[arg(long)]
    q: Option<String>,
    #[arg(long = "drug")]
    drugs: Vec<String>,
    #[arg(long = "gene")]
    genes: Vec<String>,
    #[arg(long = "mesh")]
    mesh: Vec<String>,
    #[arg(long)]
    year_min: Option<i32>,
    #[arg(long)]
    year_max: Option<i32>,
    #[arg(long, default_value_t = 0)]
    page: usize,
    #[arg(long, default_value_t = medfacet_core::index::DEFAULT_PAGE_SIZE)]
    page_size: usize,
    #[arg(long, default_value_t = medfacet_core::index::DEFAULT_FACET_LIMIT)]
    facet_limit: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "MEDFACET_ADDR", default_value = "127.0.0.1:8080")]
    addr: String,
    #[arg(long, env = "MEDFACET_INDEX")]
    index: PathBuf,
    /// Browser origin allowed to call the API (`*` for any).
    #[arg(long, env = "MEDFACET_CORS_ORIGIN")]
    cors_origin: Option<String>,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long, env = "MEDFACET_CONFIG")]
    config: PathBuf,
    /// Verdict table overriding the configured oracle.
    #[arg(long)]
    oracle_table: Option<PathBuf>,
}

/// A fatal error: printed as `error[<code>]: <message>`, exit status 1.
#[derive(Debug)]
struct Failure {
    code: &'static str,
    message: String,
}

impl Failure {
    fn new(code: &'static str, message: impl Display) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let code = match &e {
            PipelineError::Config(_) => "config",
            PipelineError::Vocab { source, .. } => source.code(),
            PipelineError::Archive(_) => "archive",
            PipelineError::Batch(_) => "batch",
            PipelineError::Index(_) => "index",
            PipelineError::Checkpoint { .. } | PipelineError::NoCheckpoint(_) => "checkpoint",
            PipelineError::Locked(_) => "locked",
            PipelineError::Io { .. } => "io-error",
            PipelineError::InjectedCrash(_) => "crash",
        };
        Failure::new(code, e)
    }
}

/// Writes to stdout, ignoring a closed pipe (`medfacet search | head`).
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn print_json<T: Serialize>(value: &T) {
    emit(&(serde_json::to_string_pretty(value).expect("serialisable output") + "\n"));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => tracing::Level::WARN,
        1 => tracing::Level::INFO,
        _ => tracing::Level::DEBUG,
    };
    tracing_subscriber::fmt()
        .with_max_level(level)
        .with_writer(std::io::stderr)
        .with_ansi(false)
        .init();

    let result = match cli.command {
        Command::Vocab(VocabCommand::Validate { drugs, genes, json }) => vocab_validate(&drugs, &genes, json),
        Command::Ingest(a) => ingest(a),
        Command::Extract(a) => extract(a),
        Command::Search(a) => search(a),
        Command::Serve(a) => serve(a),
        Command::Replay(a) => replay(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error[{}]: {}", f.code, f.message);
            ExitCode::from(1)
        }
    }
}

// --- vocab validate -------------------------------------------------------------

fn vocab_validate(drugs: &Path, genes: &Path, json: bool) -> Result<u8, Failure> {
    let fail = |path: &Path, e: VocabError| Failure::new(e.code(), format!("{}: {e}", path.display()));
    let d = DrugVocabulary::read_unchecked_path(drugs).map_err(|e| fail(drugs, e))?;
    let g = GeneVocabulary::read_unchecked_path(genes).map_err(|e| fail(genes, e))?;
    let (dr, gr) = (d.validate(), g.validate());
    if json {
        print_json(&serde_json::json!({
            "drugs": { "path": drugs, "entries": d.len(), "report": dr },
            "genes": { "path": genes, "entries": g.len(), "report": gr },
        }));
    } else {
        println!("{} ({} drugs)\n{dr}\n", drugs.display(), d.len());
        println!("{} ({} genes)\n{gr}", genes.display(), g.len());
    }
    Ok(if dr.is_loadable() && gr.is_loadable() { 0 } else { 1 })
}

// --- ingest ---------------------------------------------------------------------

fn load_config(path: &Path) -> Result<PipelineConfig, Failure> {
    PipelineConfig::load(path).map_err(|e| Failure::new("config", e))
}

fn ingest(a: IngestArgs) -> Result<u8, Failure> {
    let mut cfg = load_config(&a.config)?;
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    let report = if a.mode.full {
        pipeline::run_full(&cfg)?
    } else {
        pipeline::run_incremental(&cfg)?
    };
    print_json(&report);
    Ok(report.exit_code() as u8)
}

// --- extract --------------------------------------------------------------------

/// Wraps an oracle and logs every call on stderr.
struct TracedOracle {
    inner: Arc<dyn Disambiguator>,
}

impl Disambiguator for TracedOracle {
    fn verdict(&self, request: &DisambiguationRequest) -> Result<Verdict, OracleError> {
        let v = self.inner.verdict(request);
        eprintln!("trace: oracle call symbol={} digest={} -> {v:?}", request.symbol(), request.digest());
        v
    }
}

fn read_text(path: &Path) -> Result<PubMedRecord, Failure> {
    let mut text = String::new();
    if path == Path::new("-") {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::new("io-error", e))?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| Failure::new("io-error", format!("{}: {e}", path.display())))?;
    }
    let mut r = PubMedRecord::new(0);
    let (title, rest) = text.split_once('\n').unwrap_or((&text, ""));
    r.title = title.trim().to_string();
    r.abstract_text = rest.trim().to_string();
    Ok(r)
}

fn extract(a: ExtractArgs) -> Result<u8, Failure> {
    let cfg = a.config.as_deref().map(load_config).transpose()?;
    let (enricher, base): (Enricher, Arc<dyn Disambiguator>) = match (&cfg, &a.drugs, &a.genes) {
        (_, Some(d), Some(g)) => {
            let fail = |p: &Path, e: VocabError| Failure::new(e.code(), format!("{}: {e}", p.display()));
            let drugs = DrugVocabulary::load_path(d).map_err(|e| fail(d, e))?;
            let genes = GeneVocabulary::load_path(g).map_err(|e| fail(g, e))?;
            let enricher = Enricher::new(
                DrugIndexer::new(Arc::new(drugs)),
                GeneIndexer::with_lexicon(Arc::new(genes), ContextLexicon::default()),
                Arc::new(NullOracle),
            );
            (enricher, Arc::new(NullOracle))
        }
        (Some(cfg), _, _) => {
            let oracle = cfg.oracle.build().map_err(|e| Failure::new("config", e))?;
            (Enricher::from_config(cfg)?, oracle)
        }
        _ => return Err(Failure::new("usage", "--config or both --drugs and --genes are required")),
    };
    let base: Arc<dyn Disambiguator> = match &a.oracle_table {
        Some(t) => Arc::new(TableOracle::open(t).map_err(|e| Failure::new("io-error", format!("{}: {e}", t.display())))?),
        None => base,
    };
    let enricher = if a.trace {
        enricher.with_oracle(Arc::new(TracedOracle { inner: base }))
    } else {
        enricher.with_oracle(base)
    };

    let record = match (a.pmid, &a.text) {
        (Some(pmid), _) => {
            let cfg = cfg.as_ref().ok_or_else(|| Failure::new("usage", "--pmid needs --config"))?;
            let index = IndexStore::new(&cfg.index).load_existing().map_err(|e| Failure::new("index", e))?;
            let stored = index.get(pmid).ok_or_else(|| Failure::new("not-found", format!("no record {pmid} in the index")))?;
            stored.record.clone()
        }
        (None, Some(path)) => read_text(path)?,
        (None, None) => unreachable!("clap requires --pmid or --text"),
    };
    if a.trace {
        let context = enricher.gene_indexer().lexicon().record_matches(&record);
        eprintln!("trace: genetics context = {context}");
    }
    let e = enricher.enrich(record);
    let calls = e.oracle_calls;
    if a.trace {
        eprintln!("trace: oracle calls = {calls}");
    }
    if a.json {
        print_json(&serde_json::json!({
            "pmid": e.record.pmid(),
            "drugs": e.record.drugs,
            "genes": e.record.genes,
            "drug_matches": e.record.drug_matches,
            "gene_matches": e.record.gene_matches,
            "dropped": e.dropped,
            "oracle_calls": calls,
        }));
    } else {
        for m in &e.record.drug_matches {
            println!("drug  {:<22} {:<9} {:<3} {}", m.token, format!("{:?}", m.channel).to_uppercase(), m.field.tag(), m.evidence);
        }
        for m in &e.record.gene_matches {
            let tier = m.tier.map(|t| format!("{t:?}").to_uppercase()).unwrap_or_else(|| "-".into());
            println!(
                "gene  {:<22} {:<9} {:<3} {:<9} {}",
                m.symbol,
                format!("{:?}", m.channel).to_uppercase(),
                m.field.tag(),
                tier,
                m.evidence
            );
        }
        for d in &e.dropped {
            println!("dropped {} ({})", d.symbol, d.reason);
        }
        if e.record.drug_matches.is_empty() && e.record.gene_matches.is_empty() {
            println!("no matches");
        }
    }
    Ok(if e.dropped.is_empty() { 0 } else { 2 })
}

// --- search ---------------------------------------------------------------------

fn print_table(r: &FacetResult) {
    let mut out = format!("total: {}\n", r.total);
    for h in &r.hits {
        let year = h.year.map_or_else(|| "----".to_string(), |y| y.to_string());
        let _ = writeln!(out, "{:>10}  {year}  {}", h.pmid, h.title);
        let mut tags = Vec::new();
        if !h.drugs.is_empty() {
            tags.push(format!("drugs: {}", h.drugs.join(", ")));
        }
        if !h.genes.is_empty() {
            tags.push(format!("genes: {}", h.genes.join(", ")));
        }
        if !tags.is_empty() {
            let _ = writeln!(out, "{:>10}        {}", "", tags.join("  "));
        }
    }
    for (name, values) in r.facets.iter().filter(|(_, v)| !v.is_empty()) {
        let shown: Vec<String> = values.iter().map(|(v, c)| format!("{v} ({c})")).collect();
        let _ = writeln!(out, "{name}: {}", shown.join(", "));
    }
    emit(&out);
}

fn search(a: SearchArgs) -> Result<u8, Failure> {
    let index = a.source.open()?;
    let q = FacetQuery {
        text: a.q,
        drugs: a.drugs,
        genes: a.genes,
        mesh: a.mesh,
        year_min: a.year_min,
        year_max: a.year_max,
        page: a.page,
        page_size: a.page_size,
        facet_limit: a.facet_limit,
    };
    let result = index.search(&q).map_err(|e| Failure::new("query", e))?;
    if a.json {
        print_json(&result);
    } else {
        print_table(&result);
    }
    Ok(0)
}

// --- serve ----------------------------------------------------------------------

fn serve(a: ServeArgs) -> Result<u8, Failure> {
    let addr = a
        .addr
        .parse()
        .map_err(|_| Failure::new("usage", format!("{:?} is not a socket address (host:port)", a.addr)))?;
    let cfg = medfacet_server::ServerConfig {
        addr,
        index: a.index,
        cors_origin: a.cors_origin,
    };
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::new("io-error", e))?;
    rt.block_on(medfacet_server::serve(cfg, medfacet_server::shutdown_signal(), |bound| {
        eprintln!("listening on http://{bound}");
    }))
    .map_err(|e| Failure::new("serve", e))?;
    Ok(0)
}

// --- replay ---------------------------------------------------------------------

fn replay(a: ReplayArgs) -> Result<u8, Failure> {
    let cfg = load_config(&a.config)?;
    let oracle: Option<Arc<dyn Disambiguator>> = match &a.oracle_table {
        Some(t) => Some(Arc::new(
            TableOracle::open(t).map_err(|e| Failure::new("io-error", format!("{}: {e}", t.display())))?,
        )),
        None => None,
    };
    let report = pipeline::replay(&cfg, oracle)?;
    print_json(&report);
    Ok(if report.still_dropped > 0 { 2 } else { 0 })
}
