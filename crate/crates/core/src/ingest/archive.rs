//! Batch archive access: a local directory or a remote HTTP(S) listing.
//!
//! Batches are the `*.xml.gz` files of the archive. A checksum sidecar next
//! to a batch (`<name>.md5` in NLM or `md5sum` format, or `<name>.sha256`)
//! is verified on fetch when present.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use md5::Md5;
use regex::Regex;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArchiveLocator {
    Local(PathBuf),
    /// Base URL of a directory listing; always ends with `/`.
    Remote(String),
}

impl FromStr for ArchiveLocator {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(if s.starts_with("http://") || s.starts_with("https://") {
            let mut url = s.to_string();
            if !url.ends_with('/') {
                url.push('/');
            }
            ArchiveLocator::Remote(url)
        } else {
            ArchiveLocator::Local(PathBuf::from(s.strip_prefix("file://").unwrap_or(s)))
        })
    }
}

impl fmt::Display for ArchiveLocator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArchiveLocator::Local(p) => write!(f, "{}", p.display()),
            ArchiveLocator::Remote(u) => f.write_str(u),
        }
    }
}

#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error("archive {locator} unreachable: {message}")]
    Unreachable { locator: String, message: String },
    #[error("batch {0} not found in archive")]
    NotFound(String),
    #[error("batch {name}: checksum mismatch (expected {expected}, computed {actual})")]
    ChecksumMismatch {
        name: String,
        expected: String,
        actual: String,
    },
    #[error("batch {name}: unreadable checksum sidecar")]
    BadSidecar { name: String },
}

impl ArchiveError {
    /// Transient failures worth retrying with backoff.
    pub fn is_retryable(&self) -> bool {
        matches!(self, ArchiveError::Unreachable { .. })
    }
}

const BATCH_SUFFIX: &str = ".xml.gz";

fn unreachable(locator: &ArchiveLocator, e: impl fmt::Display) -> ArchiveError {
    ArchiveError::Unreachable {
        locator: locator.to_string(),
        message: e.to_string(),
    }
}

fn agent() -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(120)))
        .http_status_as_error(false)
        .build()
        .into()
}

/// Batch names of the archive sorted lexicographically, restricted to names
/// strictly after `since` when given.
pub fn list_remote_batches(
    locator: &ArchiveLocator,
    since: Option<&str>,
) -> Result<Vec<String>, ArchiveError> {
    let mut names = match locator {
        ArchiveLocator::Local(dir) => {
            let entries = fs::read_dir(dir).map_err(|e| unreachable(locator, e))?;
            let mut names = Vec::new();
            for entry in entries {
                let entry = entry.map_err(|e| unreachable(locator, e))?;
                if !entry.file_type().map(|t| t.is_file()).unwrap_or(false) {
                    continue;
                }
                if let Some(name) = entry.file_name().to_str() {
                    if name.ends_with(BATCH_SUFFIX) {
                        names.push(name.to_string());
                    }
                }
            }
            names
        }
        ArchiveLocator::Remote(url) => {
            let mut resp = agent().get(url).call().map_err(|e| unreachable(locator, e))?;
            if !resp.status().is_success() {
                return Err(unreachable(locator, format!("HTTP {}", resp.status())));
            }
            let body = resp
                .body_mut()
                .read_to_string()
                .map_err(|e| unreachable(locator, e))?;
            batch_links(&body)
        }
    };
    names.sort();
    names.dedup();
    if let Some(since) = since {
        names.retain(|n| n.as_str() > since);
    }
    Ok(names)
}

/// `*.xml.gz` link targets of an HTML directory listing.
fn batch_links(html: &str) -> Vec<String> {
    let re = Regex::new(r#"href="([A-Za-z0-9._-]+\.xml\.gz)""#).expect("static regex");
    re.captures_iter(html).map(|c| c[1].to_string()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Algo {
    Md5,
    Sha256,
}

impl Algo {
    fn suffix(self) -> &'static str {
        match self {
            Algo::Md5 => ".md5",
            Algo::Sha256 => ".sha256",
        }
    }

    fn hex_len(self) -> usize {
        match self {
            Algo::Md5 => 32,
            Algo::Sha256 => 64,
        }
    }

    fn digest(self, bytes: &[u8]) -> String {
        match self {
            Algo::Md5 => hex::encode(Md5::digest(bytes)),
            Algo::Sha256 => hex::encode(Sha256::digest(bytes)),
        }
    }
}

/// Extracts the hex digest from `MD5(name)= hex` or `hex  name` sidecars.
fn sidecar_digest(content: &str, algo: Algo) -> Option<String> {
    content
        .split(|c: char| c.is_whitespace() || c == '=')
        .find(|tok| tok.len() == algo.hex_len() && tok.bytes().all(|b| b.is_ascii_hexdigit()))
        .map(str::to_ascii_lowercase)
}

fn read_local_sidecar(dir: &Path, name: &str, algo: Algo) -> io::Result<Option<String>> {
    let path = dir.join(format!("{name}{}", algo.suffix()));
    match fs::read_to_string(path) {
        Ok(s) => Ok(Some(s)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e),
    }
}

fn read_remote(url: &str) -> Result<Option<Vec<u8>>, String> {
    let mut resp = agent().get(url).call().map_err(|e| e.to_string())?;
    if resp.status().as_u16() == 404 {
        return Ok(None);
    }
    if !resp.status().is_success() {
        return Err(format!("HTTP {}", resp.status()));
    }
    resp.body_mut()
        .with_config()
        .limit(u64::MAX)
        .read_to_vec()
        .map(Some)
        .map_err(|e| e.to_string())
}

/// Raw compressed bytes of one batch, checked against its sidecar digest
/// when the archive publishes one.
pub fn fetch_batch(locator: &ArchiveLocator, name: &str) -> Result<Vec<u8>, ArchiveError> {
    let (bytes, sidecars) = match locator {
        ArchiveLocator::Local(dir) => {
            let bytes = match fs::read(dir.join(name)) {
                Ok(b) => b,
                Err(e) if e.kind() == io::ErrorKind::NotFound => {
                    return Err(ArchiveError::NotFound(name.to_string()))
                }
                Err(e) => return Err(unreachable(locator, e)),
            };
            let mut sidecars = Vec::new();
            for algo in [Algo::Md5, Algo::Sha256] {
                if let Some(s) =
                    read_local_sidecar(dir, name, algo).map_err(|e| unreachable(locator, e))?
                {
                    sidecars.push((algo, s));
                }
            }
            (bytes, sidecars)
        }
        ArchiveLocator::Remote(url) => {
            let bytes = read_remote(&format!("{url}{name}"))
                .map_err(|e| unreachable(locator, e))?
                .ok_or_else(|| ArchiveError::NotFound(name.to_string()))?;
            let mut sidecars = Vec::new();
            for algo in [Algo::Md5, Algo::Sha256] {
                if let Some(s) = read_remote(&format!("{url}{name}{}", algo.suffix()))
                    .map_err(|e| unreachable(locator, e))?
                {
                    sidecars.push((algo, String::from_utf8_lossy(&s).into_owned()));
                }
            }
            (bytes, sidecars)
        }
    };
    for (algo, content) in sidecars {
        let expected = sidecar_digest(&content, algo).ok_or_else(|| ArchiveError::BadSidecar {
            name: name.to_string(),
        })?;
        let actual = algo.digest(&bytes);
        if actual != expected {
            return Err(ArchiveError::ChecksumMismatch {
                name: name.to_string(),
                expected,
                actual,
            });
        }
    }
    Ok(bytes)
}
