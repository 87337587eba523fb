//! Semantic disambiguation of highly polysemic gene symbols.
//!
//! A [`Disambiguator`] answers whether an acronym in a text refers to a given
//! gene. The remote implementation talks to a text-completion endpoint with
//! a fixed true/false prompt; the table and constant implementations are
//! deterministic doubles for tests and offline runs.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Inputs of one disambiguation question.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DisambiguationRequest {
    symbol: String,
    gene_name: String,
    text: String,
}

impl DisambiguationRequest {
    /// Fails when any of the three fields is empty.
    pub fn new(
        symbol: impl Into<String>,
        gene_name: impl Into<String>,
        text: impl Into<String>,
    ) -> Result<Self, String> {
        let req = DisambiguationRequest {
            symbol: symbol.into(),
            gene_name: gene_name.into(),
            text: text.into(),
        };
        for (name, value) in [
            ("symbol", &req.symbol),
            ("gene_name", &req.gene_name),
            ("text", &req.text),
        ] {
            if value.trim().is_empty() {
                return Err(format!("disambiguation request has an empty {name}"));
            }
        }
        Ok(req)
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn gene_name(&self) -> &str {
        &self.gene_name
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Hex SHA-256 over the three fields, NUL-separated. Key of the verdict
    /// cache and of the table double.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.symbol.as_bytes());
        h.update([0u8]);
        h.update(self.gene_name.as_bytes());
        h.update([0u8]);
        h.update(self.text.as_bytes());
        hex::encode(h.finalize())
    }
}

const PROMPT_HEAD: &str = "Answer the following question by true or false. Do not add anything else.  In the text between single quotes that follows this question, does the acronym ";

/// Instantiates the disambiguation prompt. Substitutions are inserted
/// verbatim: no quoting, no escaping.
pub fn render_prompt(req: &DisambiguationRequest) -> String {
    let mut out = String::with_capacity(
        PROMPT_HEAD.len() + req.symbol.len() + req.gene_name.len() + req.text.len() + 24,
    );
    out.push_str(PROMPT_HEAD);
    out.push_str(&req.symbol);
    out.push_str(" refer to the gene ");
    out.push_str(&req.gene_name);
    out.push_str("? \"");
    out.push_str(&req.text);
    out.push('"');
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "verdict", content = "raw")]
pub enum Verdict {
    True,
    False,
    /// The model answered something other than true/false.
    Indeterminate(String),
}

/// Normalises a model reply: surrounding whitespace and trailing punctuation
/// are stripped and case is folded before comparing with `true` / `false`.
pub fn parse_verdict(raw: &str) -> Verdict {
    let norm = raw
        .trim()
        .trim_end_matches(|c: char| c.is_ascii_punctuation() || c.is_whitespace())
        .to_lowercase();
    match norm.as_str() {
        "true" => Verdict::True,
        "false" => Verdict::False,
        _ => Verdict::Indeterminate(raw.to_string()),
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle transport failure: {0}")]
    Transport(String),
    #[error("oracle returned HTTP {0}")]
    Status(u16),
    #[error("oracle reply has no text field")]
    MissingText,
    #[error("oracle unavailable: {0}")]
    Unavailable(String),
}

pub trait Disambiguator: Send + Sync {
    fn verdict(&self, request: &DisambiguationRequest) -> Result<Verdict, OracleError>;
}

impl std::fmt::Debug for dyn Disambiguator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("dyn Disambiguator")
    }
}

impl<D: Disambiguator + ?Sized> Disambiguator for &D {
    fn verdict(&self, request: &DisambiguationRequest) -> Result<Verdict, OracleError> {
        (**self).verdict(request)
    }
}

impl<D: Disambiguator + ?Sized> Disambiguator for Box<D> {
    fn verdict(&self, request: &DisambiguationRequest) -> Result<Verdict, OracleError> {
        (**self).verdict(request)
    }
}

impl<D: Disambiguator + ?Sized> Disambiguator for std::sync::Arc<D> {
    fn verdict(&self, request: &DisambiguationRequest) -> Result<Verdict, OracleError> {
        (**self).verdict(request)
    }
}

/// Returns the same verdict for every request.
#[derive(Debug, Clone)]
pub struct ConstantOracle(pub Verdict);

impl Disambiguator for ConstantOracle {
    fn verdict(&self, _: &DisambiguationRequest) -> Result<Verdict, OracleError> {
        Ok(self.0.clone())
    }
}

/// Used when no oracle is configured: every semantic candidate is dropped.
#[derive(Debug, Clone, Default)]
pub struct NullOracle;

impl Disambiguator for NullOracle {
    fn verdict(&self, _: &DisambiguationRequest) -> Result<Verdict, OracleError> {
        Err(OracleError::Unavailable("no oracle configured".into()))
    }
}

fn read_verdict_table<R: BufRead>(reader: R) -> io::Result<HashMap<String, Verdict>> {
    let mut table = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (digest, verdict) = line.split_once('\t').ok_or_else(|| {
            io::Error::new(
                io::ErrorKind::InvalidData,
                format!("line {}: expected digest<TAB>verdict", i + 1),
            )
        })?;
        table.insert(digest.trim().to_string(), parse_verdict(verdict));
    }
    Ok(table)
}

/// Deterministic double backed by a `digest\tverdict` TSV.
#[derive(Debug, Clone, Default)]
pub struct TableOracle {
    table: HashMap<String, Verdict>,
}

impl TableOracle {
    pub fn from_reader<R: BufRead>(reader: R) -> io::Result<Self> {
        Ok(TableOracle {
            table: read_verdict_table(reader)?,
        })
    }

    pub fn open(path: impl AsRef<Path>) -> io::Result<Self> {
        Self::from_reader(BufReader::new(File::open(path)?))
    }

    pub fn insert(&mut self, request: &DisambiguationRequest, verdict: Verdict) {
        self.table.insert(request.digest(), verdict);
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl Disambiguator for TableOracle {
    fn verdict(&self, request: &DisambiguationRequest) -> Result<Verdict, OracleError> {
        self.table.get(&request.digest()).cloned().ok_or_else(|| {
            OracleError::Unavailable(format!("no recorded verdict for {}", request.digest()))
        })
    }
}

/// Memoises definite verdicts by request digest, optionally persisting them
/// to an append-only `digest\tverdict` file (same format as [`TableOracle`]).
/// Indeterminate replies and errors are not cached.
pub struct CachedOracle<D> {
    inner: D,
    cache: Mutex<HashMap<String, bool>>,
    file: Option<Mutex<File>>,
}

impl<D: Disambiguator> CachedOracle<D> {
    pub fn in_memory(inner: D) -> Self {
        CachedOracle {
            inner,
            cache: Mutex::new(HashMap::new()),
            file: None,
        }
    }

    pub fn persistent(inner: D, path: impl AsRef<Path>) -> io::Result<Self> {
        let path = path.as_ref();
        let mut cache = HashMap::new();
        if path.exists() {
            for (digest, verdict) in read_verdict_table(BufReader::new(File::open(path)?))? {
                match verdict {
                    Verdict::True => cache.insert(digest, true),
                    Verdict::False => cache.insert(digest, false),
                    Verdict::Indeterminate(_) => None,
                };
            }
        } else if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(CachedOracle {
            inner,
            cache: Mutex::new(cache),
            file: Some(Mutex::new(file)),
        })
    }

    pub fn cached_len(&self) -> usize {
        self.cache.lock().unwrap().len()
    }
}

impl<D: Disambiguator> Disambiguator for CachedOracle<D> {
    fn verdict(&self, request: &DisambiguationRequest) -> Result<Verdict, OracleError> {
        let digest = request.digest();
        if let Some(&v) = self.cache.lock().unwrap().get(&digest) {
            return Ok(if v { Verdict::True } else { Verdict::False });
        }
        let verdict = self.inner.verdict(request)?;
        let definite = match verdict {
            Verdict::True => Some(true),
            Verdict::False => Some(false),
            Verdict::Indeterminate(_) => None,
        };
        if let Some(v) = definite {
            let fresh = self.cache.lock().unwrap().insert(digest.clone(), v).is_none();
            if let (true, Some(file)) = (fresh, &self.file) {
                let mut f = file.lock().unwrap();
                if let Err(e) = writeln!(f, "{digest}\t{v}") {
                    tracing::warn!(error = %e, "cannot persist oracle verdict");
                }
            }
        }
        Ok(verdict)
    }
}

// --- remote completion client ---------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteOracleConfig {
    pub url: String,
    pub model: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
    /// Environment variable holding an optional bearer token.
    #[serde(default = "default_token_env")]
    pub token_env: String,
}

fn default_timeout_secs() -> u64 {
    30
}

fn default_max_in_flight() -> usize {
    4
}

fn default_token_env() -> String {
    "MEDFACET_ORACLE_TOKEN".to_string()
}

impl RemoteOracleConfig {
    pub fn new(url: impl Into<String>, model: impl Into<String>) -> Self {
        RemoteOracleConfig {
            url: url.into(),
            model: model.into(),
            timeout_secs: default_timeout_secs(),
            max_in_flight: default_max_in_flight(),
            token_env: default_token_env(),
        }
    }
}

#[derive(Debug)]
struct InFlightLimit {
    max: usize,
    current: Mutex<usize>,
    freed: Condvar,
}

impl InFlightLimit {
    fn new(max: usize) -> Self {
        InFlightLimit {
            max: max.max(1),
            current: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> InFlightPermit<'_> {
        let mut n = self.current.lock().unwrap();
        while *n >= self.max {
            n = self.freed.wait(n).unwrap();
        }
        *n += 1;
        InFlightPermit(self)
    }
}

struct InFlightPermit<'a>(&'a InFlightLimit);

impl Drop for InFlightPermit<'_> {
    fn drop(&mut self) {
        *self.0.current.lock().unwrap() -= 1;
        self.0.freed.notify_one();
    }
}

/// Client for a generic text-completion endpoint.
///
/// Sends `{"model", "temperature": 0, "prompt"}` as a JSON POST and reads
/// the reply text from `text`, `choices[0].text` or `response`, in that
/// order.
pub struct CompletionOracle {
    config: RemoteOracleConfig,
    agent: ureq::Agent,
    token: Option<String>,
    limit: InFlightLimit,
}

impl CompletionOracle {
    pub fn new(config: RemoteOracleConfig) -> Self {
        let token = std::env::var(&config.token_env)
            .ok()
            .filter(|t| !t.is_empty());
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .build()
            .into();
        let limit = InFlightLimit::new(config.max_in_flight);
        CompletionOracle {
            config,
            agent,
            token,
            limit,
        }
    }

    pub fn config(&self) -> &RemoteOracleConfig {
        &self.config
    }
}

pub(crate) fn reply_text(body: &serde_json::Value) -> Option<&str> {
    body.get("text")
        .and_then(|v| v.as_str())
        .or_else(|| body.pointer("/choices/0/text").and_then(|v| v.as_str()))
        .or_else(|| body.get("response").and_then(|v| v.as_str()))
}

impl Disambiguator for CompletionOracle {
    fn verdict(&self, request: &DisambiguationRequest) -> Result<Verdict, OracleError> {
        let body = serde_json::json!({
            "model": self.config.model,
            "temperature": 0,
            "prompt": render_prompt(request),
        });
        let _permit = self.limit.acquire();
        let mut req = self.agent.post(&self.config.url);
        if let Some(token) = &self.token {
            req = req.header("Authorization", &format!("Bearer {token}"));
        }
        let mut resp = req.send_json(&body).map_err(|e| match e {
            ureq::Error::StatusCode(code) => OracleError::Status(code),
            other => OracleError::Transport(other.to_string()),
        })?;
        let reply: serde_json::Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| OracleError::Transport(e.to_string()))?;
        let text = reply_text(&reply).ok_or(OracleError::MissingText)?;
        Ok(parse_verdict(text))
    }
}

/// A semantic candidate that could not be adjudicated, kept for replay.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedCandidate {
    pub pmid: u64,
    pub symbol: String,
    pub reason: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_reply: Option<String>,
}

/// Appends dropped candidates as JSON lines.
pub fn append_dropped(path: &Path, dropped: &[DroppedCandidate]) -> io::Result<()> {
    if dropped.is_empty() {
        return Ok(());
    }
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    for d in dropped {
        serde_json::to_writer(&mut f, d)?;
        f.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_dropped(path: &Path) -> io::Result<Vec<DroppedCandidate>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

/// Default location of the verdict cache next to a checkpoint.
pub fn default_cache_path(state_dir: &Path) -> PathBuf {
    state_dir.join("oracle_cache.tsv")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{Read, Write};
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    const CAD_NAME: &str =
        "carbamoyl-phosphate synthetase 2, aspartate transcarbamylase, and dihydroorotase";

    #[test]
    fn request_fields_must_be_nonempty() {
        assert!(DisambiguationRequest::new("CAD", CAD_NAME, "text").is_ok());
        assert!(DisambiguationRequest::new("", CAD_NAME, "text").is_err());
        assert!(DisambiguationRequest::new("CAD", " ", "text").is_err());
        assert!(DisambiguationRequest::new("CAD", CAD_NAME, "").is_err());
    }

    #[test]
    fn prompt_substitutes_verbatim() {
        let req = DisambiguationRequest::new("CAD", CAD_NAME, "CAD is overexpressed.").unwrap();
        assert_eq!(
            render_prompt(&req),
            format!(
                "Answer the following question by true or false. Do not add anything else.  In the text between single quotes that follows this question, does the acronym CAD refer to the gene {CAD_NAME}? \"CAD is overexpressed.\""
            )
        );
    }

    #[test]
    fn prompt_does_not_expand_placeholders_in_text() {
        let req = DisambiguationRequest::new("VHL", "von Hippel-Lindau", "see ${symbol} \"x\"")
            .unwrap();
        assert!(render_prompt(&req).ends_with("von Hippel-Lindau? \"see ${symbol} \"x\"\""));
    }

    #[test]
    fn verdict_normalisation() {
        assert_eq!(parse_verdict("true"), Verdict::True);
        assert_eq!(parse_verdict(" False\n"), Verdict::False);
        assert_eq!(parse_verdict("TRUE."), Verdict::True);
        assert_eq!(
            parse_verdict("It is likely true"),
            Verdict::Indeterminate("It is likely true".into())
        );
        assert_eq!(parse_verdict(""), Verdict::Indeterminate(String::new()));
    }

    #[test]
    fn table_oracle_reads_digests() {
        let req = DisambiguationRequest::new("CAD", CAD_NAME, "x").unwrap();
        let tsv = format!("# digest\tverdict\n{}\ttrue\n", req.digest());
        let oracle = TableOracle::from_reader(tsv.as_bytes()).unwrap();
        assert_eq!(oracle.verdict(&req).unwrap(), Verdict::True);
        let other = DisambiguationRequest::new("CAD", CAD_NAME, "y").unwrap();
        assert!(oracle.verdict(&other).is_err());
    }

    struct Counting(AtomicUsize, Verdict);

    impl Disambiguator for Counting {
        fn verdict(&self, _: &DisambiguationRequest) -> Result<Verdict, OracleError> {
            self.0.fetch_add(1, Ordering::SeqCst);
            Ok(self.1.clone())
        }
    }

    #[test]
    fn cache_persists_across_instances() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.tsv");
        let req = DisambiguationRequest::new("CAD", CAD_NAME, "x").unwrap();

        let inner = Arc::new(Counting(AtomicUsize::new(0), Verdict::False));
        let cached = CachedOracle::persistent(inner.clone(), &path).unwrap();
        assert_eq!(cached.verdict(&req).unwrap(), Verdict::False);
        assert_eq!(cached.verdict(&req).unwrap(), Verdict::False);
        assert_eq!(inner.0.load(Ordering::SeqCst), 1);
        drop(cached);

        let inner2 = Arc::new(Counting(AtomicUsize::new(0), Verdict::True));
        let cached = CachedOracle::persistent(inner2.clone(), &path).unwrap();
        assert_eq!(cached.verdict(&req).unwrap(), Verdict::False);
        assert_eq!(inner2.0.load(Ordering::SeqCst), 0);

        // the cache file doubles as a table oracle
        let table = TableOracle::open(&path).unwrap();
        assert_eq!(table.verdict(&req).unwrap(), Verdict::False);
    }

    #[test]
    fn indeterminate_is_not_cached() {
        let inner = Arc::new(Counting(
            AtomicUsize::new(0),
            Verdict::Indeterminate("maybe".into()),
        ));
        let cached = CachedOracle::in_memory(inner.clone());
        let req = DisambiguationRequest::new("CAD", CAD_NAME, "x").unwrap();
        cached.verdict(&req).unwrap();
        cached.verdict(&req).unwrap();
        assert_eq!(inner.0.load(Ordering::SeqCst), 2);
        assert_eq!(cached.cached_len(), 0);
    }

    #[test]
    fn reply_text_shapes() {
        use serde_json::json;
        assert_eq!(reply_text(&json!({"text": "true"})), Some("true"));
        assert_eq!(
            reply_text(&json!({"choices": [{"text": " false"}]})),
            Some(" false")
        );
        assert_eq!(reply_text(&json!({"response": "true"})), Some("true"));
        assert_eq!(reply_text(&json!({"other": 1})), None);
    }

    /// One-shot HTTP server answering a single request with `reply`, handing
    /// the raw request back through the join handle.
    fn serve_once(status: &'static str, reply: &'static str) -> (String, std::thread::JoinHandle<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/complete", listener.local_addr().unwrap());
        let handle = std::thread::spawn(move || {
            let (mut stream, _) = listener.accept().unwrap();
            let mut buf = Vec::new();
            let mut chunk = [0u8; 4096];
            loop {
                let n = stream.read(&mut chunk).unwrap();
                buf.extend_from_slice(&chunk[..n]);
                let text = String::from_utf8_lossy(&buf);
                if let Some(split) = text.find("\r\n\r\n") {
                    let len = text[..split]
                        .lines()
                        .find_map(|l| {
                            l.to_ascii_lowercase()
                                .strip_prefix("content-length:")
                                .map(|v| v.trim().parse::<usize>().unwrap())
                        })
                        .unwrap_or(0);
                    if buf.len() >= split + 4 + len {
                        break;
                    }
                }
                if n == 0 {
                    break;
                }
            }
            let response = format!(
                "HTTP/1.1 {status}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{reply}",
                reply.len()
            );
            stream.write_all(response.as_bytes()).unwrap();
            String::from_utf8(buf).unwrap()
        });
        (url, handle)
    }

    #[test]
    fn remote_client_protocol() {
        let (url, handle) = serve_once("200 OK", r#"{"text":" True\n"}"#);
        let oracle = CompletionOracle::new(RemoteOracleConfig {
            url,
            model: "llama3:8b".into(),
            timeout_secs: 5,
            max_in_flight: 2,
            token_env: "MEDFACET_TEST_UNSET_TOKEN".into(),
        });
        let req = DisambiguationRequest::new("CAD", CAD_NAME, "CAD is a gene").unwrap();
        assert_eq!(oracle.verdict(&req).unwrap(), Verdict::True);
        let raw = handle.join().unwrap();
        assert!(raw.starts_with("POST /complete"));
        let body = &raw[raw.find("\r\n\r\n").unwrap() + 4..];
        let json: serde_json::Value = serde_json::from_str(body).unwrap();
        assert_eq!(json["temperature"], 0);
        assert_eq!(json["model"], "llama3:8b");
        assert_eq!(json["prompt"], render_prompt(&req));
    }

    #[test]
    fn remote_client_status_error() {
        let (url, handle) = serve_once("503 Service Unavailable", "{}");
        let oracle = CompletionOracle::new(RemoteOracleConfig {
            url,
            model: "m".into(),
            timeout_secs: 5,
            max_in_flight: 1,
            token_env: "MEDFACET_TEST_UNSET_TOKEN".into(),
        });
        let req = DisambiguationRequest::new("CAD", CAD_NAME, "x").unwrap();
        assert!(matches!(oracle.verdict(&req), Err(OracleError::Status(503))));
        handle.join().unwrap();
    }

    #[test]
    fn unreachable_endpoint_is_transport_error() {
        let port = {
            let l = TcpListener::bind("127.0.0.1:0").unwrap();
            l.local_addr().unwrap().port()
        };
        let oracle = CompletionOracle::new(RemoteOracleConfig {
            url: format!("http://127.0.0.1:{port}/"),
            model: "m".into(),
            timeout_secs: 2,
            max_in_flight: 1,
            token_env: "MEDFACET_TEST_UNSET_TOKEN".into(),
        });
        let req = DisambiguationRequest::new("CAD", CAD_NAME, "x").unwrap();
        assert!(matches!(oracle.verdict(&req), Err(OracleError::Transport(_))));
    }

    #[test]
    fn in_flight_limit_is_enforced() {
        let limit = Arc::new(InFlightLimit::new(2));
        let peak = Arc::new(AtomicUsize::new(0));
        let active = Arc::new(AtomicUsize::new(0));
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let (limit, peak, active) = (limit.clone(), peak.clone(), active.clone());
                std::thread::spawn(move || {
                    let _p = limit.acquire();
                    let now = active.fetch_add(1, Ordering::SeqCst) + 1;
                    peak.fetch_max(now, Ordering::SeqCst);
                    std::thread::sleep(Duration::from_millis(10));
                    active.fetch_sub(1, Ordering::SeqCst);
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        assert!(peak.load(Ordering::SeqCst) <= 2);
    }
}
