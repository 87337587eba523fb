//! Extract, transform, load.
//!
//! A run walks the archive's batches in name order. Each batch is parsed on
//! one thread which feeds a bounded queue; a pool of stateless workers
//! enriches the records; the results are put back in event order and
//! applied to the index by a single writer. After every batch the index is
//! committed to its store and then the checkpoint is rewritten, so a crash
//! costs at most the re-processing of one batch, and re-processing is
//! harmless because upserts and deletes are idempotent.

use std::collections::BTreeSet;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use crossbeam_channel::bounded;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::drugs::DrugIndexer;
use crate::genes::oracle::{append_dropped, read_dropped, DroppedCandidate};
use crate::genes::{
    CachedOracle, CompletionOracle, ContextLexicon, Disambiguator, GeneIndexer, NullOracle,
    RemoteOracleConfig, TableOracle,
};
use crate::index::{EnrichedRecord, FacetIndex, IndexStore, SnapshotError};
use crate::ingest::{
    fetch_batch, list_remote_batches, parse_batch, ArchiveError, ArchiveLocator, BatchError,
    BatchItem, BatchStats, ParseError,
};
use crate::record::{PubMedRecord, RecordEvent};
use crate::vocab::{DrugVocabulary, GeneVocabulary, VocabError};

// --- configuration ----------------------------------------------------------

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleKind {
    /// No disambiguation service: every semantic candidate is dropped.
    #[default]
    None,
    /// `digest\tverdict` table, the offline test double.
    Table,
    /// Remote text-completion endpoint.
    Remote,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSettings {
    #[serde(default)]
    pub kind: OracleKind,
    /// Verdict table for `kind = "table"`.
    pub table: Option<PathBuf>,
    pub url: Option<String>,
    pub model: Option<String>,
    pub timeout_secs: Option<u64>,
    pub max_in_flight: Option<usize>,
    pub token_env: Option<String>,
    /// Persistent verdict cache.
    pub cache: Option<PathBuf>,
}

impl OracleSettings {
    pub fn build(&self) -> Result<Arc<dyn Disambiguator>, ConfigError> {
        let io_err = |path: &Path| {
            let path = path.to_path_buf();
            move |source| ConfigError::Io { path, source }
        };
        let inner: Box<dyn Disambiguator> = match self.kind {
            OracleKind::None => Box::new(NullOracle),
            OracleKind::Table => {
                let path = self
                    .table
                    .as_ref()
                    .ok_or_else(|| ConfigError::Invalid("oracle.table is required for kind = \"table\"".into()))?;
                Box::new(TableOracle::open(path).map_err(io_err(path))?)
            }
            OracleKind::Remote => {
                let url = self
                    .url
                    .clone()
                    .ok_or_else(|| ConfigError::Invalid("oracle.url is required for kind = \"remote\"".into()))?;
                let model = self
                    .model
                    .clone()
                    .ok_or_else(|| ConfigError::Invalid("oracle.model is required for kind = \"remote\"".into()))?;
                let mut cfg = RemoteOracleConfig::new(url, model);
                if let Some(t) = self.timeout_secs {
                    cfg.timeout_secs = t;
                }
                if let Some(n) = self.max_in_flight {
                    if n == 0 {
                        return Err(ConfigError::Invalid("oracle.max_in_flight must be at least 1".into()));
                    }
                    cfg.max_in_flight = n;
                }
                if let Some(env) = &self.token_env {
                    cfg.token_env = env.clone();
                }
                Box::new(CompletionOracle::new(cfg))
            }
        };
        Ok(match (&self.cache, self.kind) {
            (_, OracleKind::None) => Arc::from(inner),
            (Some(path), _) => Arc::new(CachedOracle::persistent(inner, path).map_err(io_err(path))?),
            (None, _) => Arc::new(CachedOracle::in_memory(inner)),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetryPolicy {
    /// Total attempts per fetch, the first one included.
    pub attempts: u32,
    pub initial_backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 4,
            initial_backoff_ms: 500,
        }
    }
}

fn default_workers() -> usize {
    thread::available_parallelism().map_or(1, |n| n.get().min(8))
}

fn default_queue_capacity() -> usize {
    1024
}

/// Pipeline settings, read from a TOML file. Relative paths are resolved
/// against the directory of that file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Local directory or http(s) URL of the batch listing.
    pub archive: String,
    pub drug_vocabulary: PathBuf,
    pub gene_vocabulary: PathBuf,
    /// Optional genetics lexicon, one term per line.
    pub context_lexicon: Option<PathBuf>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_queue_capacity")]
    pub queue_capacity: usize,
    pub checkpoint: PathBuf,
    pub index: PathBuf,
    /// Defaults to `parse_errors.jsonl` next to the checkpoint.
    pub parse_error_log: Option<PathBuf>,
    /// Defaults to `dropped.jsonl` next to the checkpoint.
    pub dropped_log: Option<PathBuf>,
    #[serde(default)]
    pub retry: RetryPolicy,
    #[serde(default)]
    pub oracle: OracleSettings,
}

impl PipelineConfig {
    /// A configuration with default optional settings.
    pub fn new(
        archive: impl Into<String>,
        drug_vocabulary: impl Into<PathBuf>,
        gene_vocabulary: impl Into<PathBuf>,
        checkpoint: impl Into<PathBuf>,
        index: impl Into<PathBuf>,
    ) -> Self {
        PipelineConfig {
            archive: archive.into(),
            drug_vocabulary: drug_vocabulary.into(),
            gene_vocabulary: gene_vocabulary.into(),
            context_lexicon: None,
            workers: default_workers(),
            queue_capacity: default_queue_capacity(),
            checkpoint: checkpoint.into(),
            index: index.into(),
            parse_error_log: None,
            dropped_log: None,
            retry: RetryPolicy::default(),
            oracle: OracleSettings::default(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: PipelineConfig = toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Makes every relative path (and a relative local archive) relative
    /// to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.drug_vocabulary);
        fix(&mut self.gene_vocabulary);
        fix(&mut self.checkpoint);
        fix(&mut self.index);
        for p in [
            &mut self.context_lexicon,
            &mut self.parse_error_log,
            &mut self.dropped_log,
            &mut self.oracle.table,
            &mut self.oracle.cache,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        if let ArchiveLocator::Local(p) = self.archive_locator() {
            if p.is_relative() {
                self.archive = base.join(p).to_string_lossy().into_owned();
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.workers == 0 {
            return Err(ConfigError::Invalid("workers must be at least 1".into()));
        }
        if self.queue_capacity == 0 {
            return Err(ConfigError::Invalid("queue_capacity must be at least 1".into()));
        }
        if self.retry.attempts == 0 {
            return Err(ConfigError::Invalid("retry.attempts must be at least 1".into()));
        }
        let outputs = [
            ("checkpoint", self.checkpoint.clone()),
            ("index", self.index.clone()),
            ("parse_error_log", self.parse_error_log_path()),
            ("dropped_log", self.dropped_log_path()),
        ];
        let mut seen = BTreeSet::new();
        for (name, p) in &outputs {
            if !seen.insert(p.clone()) {
                return Err(ConfigError::Invalid(format!("{name} path {} is used twice", p.display())));
            }
            for input in [&self.drug_vocabulary, &self.gene_vocabulary] {
                if p == input {
                    return Err(ConfigError::Invalid(format!("{name} would overwrite {}", input.display())));
                }
            }
        }
        Ok(())
    }

    pub fn archive_locator(&self) -> ArchiveLocator {
        self.archive.parse().expect("infallible")
    }

    fn state_dir(&self) -> PathBuf {
        self.checkpoint
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default()
    }

    pub fn parse_error_log_path(&self) -> PathBuf {
        self.parse_error_log
            .clone()
            .unwrap_or_else(|| self.state_dir().join("parse_errors.jsonl"))
    }

    pub fn dropped_log_path(&self) -> PathBuf {
        self.dropped_log
            .clone()
            .unwrap_or_else(|| self.state_dir().join("dropped.jsonl"))
    }
}

// --- checkpoint ---------------------------------------------------------------

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub name: String,
    pub citations: usize,
    pub upserts: usize,
    pub deletes: usize,
    pub parse_errors: usize,
    pub oracle_calls: usize,
}

/// Durable progress marker: the batches whose effects are committed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub batches: Vec<BatchRecord>,
    pub oracle_calls: usize,
}

impl Checkpoint {
    pub fn watermark(&self) -> Option<&str> {
        self.batches.last().map(|b| b.name.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.batches.is_empty()
    }

    /// Batch names must be strictly increasing.
    pub fn check(&self) -> Result<(), String> {
        for w in self.batches.windows(2) {
            if w[0].name >= w[1].name {
                return Err(format!("batch {} is listed after {}", w[1].name, w[0].name));
            }
        }
        Ok(())
    }

    /// `None` when the file does not exist.
    pub fn load(path: &Path) -> Result<Option<Checkpoint>, PipelineError> {
        let bytes = match fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(PipelineError::io(path, e)),
        };
        let cp: Checkpoint = serde_json::from_slice(&bytes).map_err(|e| PipelineError::Checkpoint {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cp.check().map_err(|message| PipelineError::Checkpoint {
            path: path.to_path_buf(),
            message,
        })?;
        Ok(Some(cp))
    }

    /// Atomic replace through a temporary file.
    pub fn save(&self, path: &Path) -> Result<(), PipelineError> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| PipelineError::io(parent, e))?;
        }
        let tmp = path.with_extension("tmp");
        let mut bytes = serde_json::to_vec_pretty(self).expect("checkpoint serialises");
        bytes.push(b'\n');
        let write = || -> io::Result<()> {
            let mut f = File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
            fs::rename(&tmp, path)
        };
        write().map_err(|e| PipelineError::io(path, e))
    }
}

// --- errors and reports -----------------------------------------------------

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("vocabulary {path}: {source}")]
    Vocab {
        path: PathBuf,
        #[source]
        source: VocabError,
    },
    #[error(transparent)]
    Archive(#[from] ArchiveError),
    #[error(transparent)]
    Batch(#[from] BatchError),
    #[error("index: {0}")]
    Index(#[from] SnapshotError),
    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: PathBuf, message: String },
    #[error("no checkpoint at {0}; run a full ingest first")]
    NoCheckpoint(PathBuf),
    #[error("another run holds the lock {0}")]
    Locked(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("run stopped by injected crash after batch {0}")]
    InjectedCrash(String),
}

impl PipelineError {
    fn io(path: &Path, source: io::Error) -> Self {
        PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub batches: usize,
    pub citations: usize,
    pub upserts: usize,
    pub deletes: usize,
    pub parse_errors: usize,
    pub oracle_calls: usize,
    pub dropped_candidates: usize,
    /// Records in the index after the run.
    pub record_count: usize,
    pub watermark: Option<String>,
}

impl RunReport {
    /// 0 when clean, 2 when some citations had to be skipped.
    pub fn exit_code(&self) -> i32 {
        if self.parse_errors > 0 {
            2
        } else {
            0
        }
    }
}

/// Where an injected crash interrupts a run (testing aid).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrashStage {
    /// Index committed, checkpoint not yet written.
    BeforeCheckpoint,
    /// Batch fully committed.
    AfterCheckpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrashPoint {
    /// Batches processed in this run before the crash.
    pub after_batches: usize,
    pub stage: CrashStage,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub crash: Option<CrashPoint>,
    /// Overrides the configured oracle.
    pub oracle: Option<Arc<dyn Disambiguator>>,
}

// --- transform ----------------------------------------------------------------

/// Stateless record enrichment shared by the workers.
#[derive(Clone)]
pub struct Enricher {
    drugs: DrugIndexer,
    genes: GeneIndexer,
    oracle: Arc<dyn Disambiguator>,
}

/// One enriched record with the side products of its enrichment.
#[derive(Debug, Clone)]
pub struct Enrichment {
    pub record: EnrichedRecord,
    pub dropped: Vec<DroppedCandidate>,
    pub oracle_calls: usize,
}

impl Enricher {
    pub fn new(drugs: DrugIndexer, genes: GeneIndexer, oracle: Arc<dyn Disambiguator>) -> Self {
        Enricher { drugs, genes, oracle }
    }

    /// Loads vocabularies, lexicon and oracle as configured.
    pub fn from_config(cfg: &PipelineConfig) -> Result<Self, PipelineError> {
        let drugs = DrugVocabulary::load_path(&cfg.drug_vocabulary).map_err(|source| PipelineError::Vocab {
            path: cfg.drug_vocabulary.clone(),
            source,
        })?;
        let genes = GeneVocabulary::load_path(&cfg.gene_vocabulary).map_err(|source| PipelineError::Vocab {
            path: cfg.gene_vocabulary.clone(),
            source,
        })?;
        let lexicon = match &cfg.context_lexicon {
            None => ContextLexicon::default(),
            Some(p) => {
                let f = File::open(p).map_err(|e| PipelineError::io(p, e))?;
                ContextLexicon::from_reader(BufReader::new(f)).map_err(|e| PipelineError::io(p, e))?
            }
        };
        Ok(Enricher::new(
            DrugIndexer::new(Arc::new(drugs)),
            GeneIndexer::with_lexicon(Arc::new(genes), lexicon),
            cfg.oracle.build()?,
        ))
    }

    pub fn with_oracle(mut self, oracle: Arc<dyn Disambiguator>) -> Self {
        self.oracle = oracle;
        self
    }

    pub fn drug_indexer(&self) -> &DrugIndexer {
        &self.drugs
    }

    pub fn gene_indexer(&self) -> &GeneIndexer {
        &self.genes
    }

    pub fn oracle(&self) -> &dyn Disambiguator {
        &*self.oracle
    }

    pub fn enrich(&self, record: PubMedRecord) -> Enrichment {
        let drug_matches = self.drugs.index(&record);
        let genes = self.genes.index(&record, &*self.oracle);
        Enrichment {
            record: EnrichedRecord::new(record, drug_matches, genes.matches),
            dropped: genes.dropped,
            oracle_calls: genes.oracle_calls,
        }
    }
}

/// An index mutation in batch event order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexOp {
    Upsert(EnrichedRecord),
    Delete(u64),
}

/// Everything one batch contributes, ready to be applied.
#[derive(Debug, Clone, Default)]
pub struct BatchOutcome {
    pub name: String,
    pub ops: Vec<IndexOp>,
    pub parse_errors: Vec<ParseError>,
    pub dropped: Vec<DroppedCandidate>,
    pub oracle_calls: usize,
    pub stats: BatchStats,
}

impl BatchOutcome {
    pub fn record(&self) -> BatchRecord {
        BatchRecord {
            name: self.name.clone(),
            citations: self.stats.citations,
            upserts: self.stats.upserts,
            deletes: self.stats.deletes,
            parse_errors: self.parse_errors.len(),
            oracle_calls: self.oracle_calls,
        }
    }

    /// Applies the operations in order.
    pub fn apply(&self, index: &FacetIndex) {
        for op in &self.ops {
            match op {
                IndexOp::Upsert(r) => index.upsert(r.clone()),
                IndexOp::Delete(p) => {
                    index.delete(*p);
                }
            }
        }
    }
}

enum Job {
    Upsert(usize, PubMedRecord),
    Delete(usize, u64),
}

enum Done {
    Upsert(usize, Box<Enrichment>),
    Delete(usize, u64),
}

/// Parses and enriches one gzip-compressed batch with `workers` transform
/// threads. The outcome does not depend on the worker count.
pub fn process_batch(
    name: &str,
    compressed: &[u8],
    enricher: &Enricher,
    workers: usize,
    queue_capacity: usize,
) -> Result<BatchOutcome, BatchError> {
    let workers = workers.max(1);
    let (job_tx, job_rx) = bounded::<Job>(queue_capacity.max(1));
    let (done_tx, done_rx) = crossbeam_channel::unbounded::<Done>();

    thread::scope(|s| {
        for _ in 0..workers {
            let job_rx = job_rx.clone();
            let done_tx = done_tx.clone();
            s.spawn(move || {
                for job in job_rx {
                    let done = match job {
                        Job::Upsert(seq, r) => Done::Upsert(seq, Box::new(enricher.enrich(r))),
                        Job::Delete(seq, p) => Done::Delete(seq, p),
                    };
                    if done_tx.send(done).is_err() {
                        break;
                    }
                }
            });
        }
        drop(job_rx);
        drop(done_tx);

        let producer = s.spawn(move || -> Result<(Vec<ParseError>, BatchStats), BatchError> {
            let mut parser = parse_batch(name, compressed);
            let mut errors = Vec::new();
            let mut seq = 0;
            for item in parser.by_ref() {
                let job = match item? {
                    BatchItem::Skipped(e) => {
                        errors.push(e);
                        continue;
                    }
                    BatchItem::Event(RecordEvent::Upsert { record }) => Job::Upsert(seq, record),
                    BatchItem::Event(RecordEvent::Delete { pmid }) => Job::Delete(seq, pmid),
                };
                seq += 1;
                if job_tx.send(job).is_err() {
                    break;
                }
            }
            Ok((errors, parser.stats()))
        });

        let mut slots: Vec<Option<Done>> = Vec::new();
        for done in done_rx {
            let seq = match &done {
                Done::Upsert(seq, _) | Done::Delete(seq, _) => *seq,
            };
            if slots.len() <= seq {
                slots.resize_with(seq + 1, || None);
            }
            slots[seq] = Some(done);
        }
        let (parse_errors, stats) = producer.join().expect("parser thread panicked")?;

        let mut outcome = BatchOutcome {
            name: name.to_string(),
            parse_errors,
            stats,
            ..Default::default()
        };
        for done in slots.into_iter().flatten() {
            match done {
                Done::Upsert(_, e) => {
                    outcome.oracle_calls += e.oracle_calls;
                    outcome.dropped.extend(e.dropped);
                    outcome.ops.push(IndexOp::Upsert(e.record));
                }
                Done::Delete(_, p) => outcome.ops.push(IndexOp::Delete(p)),
            }
        }
        Ok(outcome)
    })
}

// --- runs -----------------------------------------------------------------------

/// Exclusive advisory lock on `<index>.lock`, held for the duration of a run.
pub struct RunLock {
    _file: File,
    path: PathBuf,
}

impl RunLock {
    pub fn acquire(index: &Path) -> Result<RunLock, PipelineError> {
        let mut name = index.as_os_str().to_owned();
        name.push(".lock");
        let path = PathBuf::from(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| PipelineError::io(parent, e))?;
        }
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(|e| PipelineError::io(&path, e))?;
        match file.try_lock() {
            Ok(()) => Ok(RunLock { _file: file, path }),
            Err(fs::TryLockError::WouldBlock) => Err(PipelineError::Locked(path)),
            Err(fs::TryLockError::Error(e)) => Err(PipelineError::io(&path, e)),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

fn with_retry<T>(
    policy: RetryPolicy,
    what: &str,
    mut f: impl FnMut() -> Result<T, ArchiveError>,
) -> Result<T, ArchiveError> {
    let mut backoff = Duration::from_millis(policy.initial_backoff_ms);
    let mut attempt = 1;
    loop {
        match f() {
            Err(e) if e.is_retryable() && attempt < policy.attempts => {
                tracing::warn!(error = %e, attempt, "{what} failed, retrying in {backoff:?}");
                thread::sleep(backoff);
                backoff = backoff.saturating_mul(2);
                attempt += 1;
            }
            other => return other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Full,
    Incremental,
}

/// Initial load: processes every batch of the archive. When a checkpoint is
/// present (an interrupted earlier run) processing resumes after it.
pub fn run_full(cfg: &PipelineConfig) -> Result<RunReport, PipelineError> {
    run_with(cfg, Mode::Full, RunOptions::default())
}

/// Daily update: processes the batches after the checkpoint watermark.
pub fn run_incremental(cfg: &PipelineConfig) -> Result<RunReport, PipelineError> {
    run_with(cfg, Mode::Incremental, RunOptions::default())
}

pub fn run_full_with(cfg: &PipelineConfig, opts: RunOptions) -> Result<RunReport, PipelineError> {
    run_with(cfg, Mode::Full, opts)
}

pub fn run_incremental_with(cfg: &PipelineConfig, opts: RunOptions) -> Result<RunReport, PipelineError> {
    run_with(cfg, Mode::Incremental, opts)
}

fn append_parse_errors(path: &Path, errors: &[ParseError]) -> io::Result<()> {
    if errors.is_empty() {
        return Ok(());
    }
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    for e in errors {
        serde_json::to_writer(&mut f, e)?;
        f.write_all(b"\n")?;
    }
    Ok(())
}

fn run_with(cfg: &PipelineConfig, mode: Mode, opts: RunOptions) -> Result<RunReport, PipelineError> {
    cfg.validate()?;
    let _lock = RunLock::acquire(&cfg.index)?;
    let mut checkpoint = match (Checkpoint::load(&cfg.checkpoint)?, mode) {
        (Some(cp), _) => cp,
        (None, Mode::Full) => Checkpoint::default(),
        (None, Mode::Incremental) => return Err(PipelineError::NoCheckpoint(cfg.checkpoint.clone())),
    };
    let mut enricher = Enricher::from_config(cfg)?;
    if let Some(o) = opts.oracle.clone() {
        enricher = enricher.with_oracle(o);
    }
    let store = IndexStore::new(&cfg.index);
    let index = store.load()?;

    let locator = cfg.archive_locator();
    let since = checkpoint.watermark().map(str::to_string);
    let names = with_retry(cfg.retry, "listing", || list_remote_batches(&locator, since.as_deref()))?;
    tracing::info!(batches = names.len(), since = ?since, "starting run");

    let parse_log = cfg.parse_error_log_path();
    let dropped_log = cfg.dropped_log_path();
    let mut report = RunReport::default();
    for (i, name) in names.iter().enumerate() {
        let bytes = with_retry(cfg.retry, "fetch", || fetch_batch(&locator, name))?;
        let outcome = process_batch(name, &bytes, &enricher, cfg.workers, cfg.queue_capacity)?;

        append_parse_errors(&parse_log, &outcome.parse_errors).map_err(|e| PipelineError::io(&parse_log, e))?;
        if !outcome.dropped.is_empty() {
            if let Some(parent) = dropped_log.parent() {
                fs::create_dir_all(parent).map_err(|e| PipelineError::io(parent, e))?;
            }
            append_dropped(&dropped_log, &outcome.dropped).map_err(|e| PipelineError::io(&dropped_log, e))?;
        }

        outcome.apply(&index);
        index.set_watermark(Some(name.clone()));
        store.commit(&index)?;
        if opts.crash == Some(CrashPoint { after_batches: i + 1, stage: CrashStage::BeforeCheckpoint }) {
            return Err(PipelineError::InjectedCrash(name.clone()));
        }

        let rec = outcome.record();
        checkpoint.oracle_calls += rec.oracle_calls;
        checkpoint.batches.push(rec);
        checkpoint.save(&cfg.checkpoint)?;
        if opts.crash == Some(CrashPoint { after_batches: i + 1, stage: CrashStage::AfterCheckpoint }) {
            return Err(PipelineError::InjectedCrash(name.clone()));
        }

        report.batches += 1;
        report.citations += outcome.stats.citations;
        report.upserts += outcome.stats.upserts;
        report.deletes += outcome.stats.deletes;
        report.parse_errors += outcome.parse_errors.len();
        report.oracle_calls += outcome.oracle_calls;
        report.dropped_candidates += outcome.dropped.len();
        tracing::info!(
            batch = %name,
            upserts = outcome.stats.upserts,
            deletes = outcome.stats.deletes,
            parse_errors = outcome.parse_errors.len(),
            "batch committed"
        );
    }
    if names.is_empty() {
        checkpoint.save(&cfg.checkpoint)?;
        if !store.exists() {
            store.commit(&index)?;
        }
    }
    report.record_count = index.len();
    report.watermark = index.watermark();
    Ok(report)
}

// --- replay -------------------------------------------------------------------

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    /// Distinct (pmid, symbol) candidates read from the log.
    pub candidates: usize,
    /// Logged records still present in the index and re-enriched.
    pub records: usize,
    /// Candidates now accepted as gene matches.
    pub recovered: usize,
    /// Candidates dropped again; they stay in the log.
    pub still_dropped: usize,
}

/// Re-adjudicates the dropped-candidate log against the current oracle.
/// Records are re-enriched from their stored version, so a candidate whose
/// record was deleted or replaced since is resolved by the newer state.
pub fn replay(cfg: &PipelineConfig, oracle: Option<Arc<dyn Disambiguator>>) -> Result<ReplayReport, PipelineError> {
    cfg.validate()?;
    let _lock = RunLock::acquire(&cfg.index)?;
    let log = cfg.dropped_log_path();
    let logged = match read_dropped(&log) {
        Ok(v) => v,
        Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(PipelineError::io(&log, e)),
    };
    let candidates: BTreeSet<(u64, String)> = logged.iter().map(|d| (d.pmid, d.symbol.clone())).collect();
    let mut report = ReplayReport {
        candidates: candidates.len(),
        ..Default::default()
    };
    if candidates.is_empty() {
        return Ok(report);
    }

    let mut enricher = Enricher::from_config(cfg)?;
    if let Some(o) = oracle {
        enricher = enricher.with_oracle(o);
    }
    let store = IndexStore::new(&cfg.index);
    let index = store.load()?;
    let pmids: BTreeSet<u64> = candidates.iter().map(|(p, _)| *p).collect();
    let mut remaining = Vec::new();
    for pmid in pmids {
        let Some(stored) = index.get(pmid) else {
            continue;
        };
        report.records += 1;
        let e = enricher.enrich(stored.record);
        for (p, symbol) in candidates.range((pmid, String::new())..) {
            if *p != pmid {
                break;
            }
            if e.record.genes.contains(symbol) {
                report.recovered += 1;
            }
        }
        remaining.extend(e.dropped.iter().cloned());
        index.upsert(e.record);
    }
    report.still_dropped = remaining.len();
    store.commit(&index)?;

    let tmp = log.with_extension("tmp");
    let _ = fs::remove_file(&tmp);
    File::create(&tmp).map_err(|e| PipelineError::io(&tmp, e))?;
    append_dropped(&tmp, &remaining).map_err(|e| PipelineError::io(&tmp, e))?;
    fs::rename(&tmp, &log).map_err(|e| PipelineError::io(&log, e))?;
    Ok(report)
}
