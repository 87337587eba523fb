//! On-disk snapshot format.
//!
//! ```text
//! <dir>/manifest.json
//! <dir>/segments/<bucket>.jsonl
//! ```
//!
//! Records are bucketed by PMID range; each segment holds one bucket, one
//! record per line in PMID order, so a snapshot of a given index state is
//! byte-for-byte reproducible. The manifest lists every segment with its
//! record count and SHA-256, and is written last.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{EnrichedRecord, FacetIndex, State};

/// PMIDs per segment.
pub(crate) const BUCKET_WIDTH: u64 = 100_000;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SEGMENT_DIR: &str = "segments";
const FORMAT: u32 = 1;

pub(crate) fn bucket_of(pmid: u64) -> u64 {
    pmid / BUCKET_WIDTH
}

fn segment_name(bucket: u64) -> String {
    format!("{bucket:08}.jsonl")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentInfo {
    pub name: String,
    pub records: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    pub record_count: usize,
    /// Last batch included in the snapshot.
    pub watermark: Option<String>,
    /// SHA-256 over the segment list.
    pub digest: String,
    pub segments: Vec<SegmentInfo>,
}

impl Manifest {
    fn segments_digest(segments: &[SegmentInfo]) -> String {
        let mut h = Sha256::new();
        for s in segments {
            h.update(format!("{}\t{}\t{}\n", s.name, s.records, s.sha256));
        }
        hex::encode(h.finalize())
    }

    pub fn read(dir: &Path) -> Result<Manifest, SnapshotError> {
        let path = dir.join(MANIFEST_FILE);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(SnapshotError::MissingManifest(dir.to_path_buf()))
            }
            Err(e) => return Err(SnapshotError::Io { path, source: e }),
        };
        serde_json::from_slice(&bytes).map_err(|e| SnapshotError::Corrupt {
            path,
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("no snapshot manifest in {0}")]
    MissingManifest(PathBuf),
    #[error("{path}: {message}")]
    Corrupt { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> SnapshotError + '_ {
    move |source| SnapshotError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn corrupt(path: &Path, message: impl Into<String>) -> SnapshotError {
    SnapshotError::Corrupt {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Writes `bytes` to `path` through a temporary file and a rename.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), SnapshotError> {
    let tmp = path.with_extension("tmp");
    let mut f = File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))?;
    sync_dir(path.parent().unwrap_or(Path::new(".")));
    Ok(())
}

/// Best-effort directory fsync so renames survive a crash.
pub(crate) fn sync_dir(dir: &Path) {
    if let Ok(d) = File::open(dir) {
        let _ = d.sync_all();
    }
}

/// Segments that can be taken over from a previous snapshot of the same
/// lineage instead of being re-serialised.
pub(crate) struct Reuse<'a> {
    pub dir: &'a Path,
    pub manifest: &'a Manifest,
    pub dirty: &'a BTreeSet<u64>,
}

fn write_segment(path: &Path, records: &[&Arc<EnrichedRecord>]) -> Result<SegmentInfo, SnapshotError> {
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, &***r).map_err(|e| corrupt(path, e.to_string()))?;
        buf.push(b'\n');
    }
    let mut f = File::create(path).map_err(io_err(path))?;
    f.write_all(&buf).map_err(io_err(path))?;
    f.sync_all().map_err(io_err(path))?;
    Ok(SegmentInfo {
        name: path.file_name().unwrap().to_string_lossy().into_owned(),
        records: records.len(),
        sha256: hex::encode(Sha256::digest(&buf)),
    })
}

pub(crate) fn write_state(
    state: &State,
    dir: &Path,
    reuse: Option<Reuse<'_>>,
) -> Result<Manifest, SnapshotError> {
    let seg_dir = dir.join(SEGMENT_DIR);
    fs::create_dir_all(&seg_dir).map_err(io_err(&seg_dir))?;

    // group records by bucket; BTreeMap iteration keeps PMID order
    let mut buckets: Vec<(u64, Vec<&Arc<EnrichedRecord>>)> = Vec::new();
    for (pmid, rec) in &state.records {
        let b = bucket_of(*pmid);
        match buckets.last_mut() {
            Some((last, v)) if *last == b => v.push(rec),
            _ => buckets.push((b, vec![rec])),
        }
    }

    let mut segments = Vec::with_capacity(buckets.len());
    for (bucket, records) in &buckets {
        let name = segment_name(*bucket);
        let path = seg_dir.join(&name);
        let previous = reuse.as_ref().and_then(|r| {
            if r.dirty.contains(bucket) {
                return None;
            }
            r.manifest
                .segments
                .iter()
                .find(|s| s.name == name && s.records == records.len())
                .map(|s| (r.dir.join(SEGMENT_DIR).join(&name), s.clone()))
        });
        let info = match previous {
            Some((src, info)) => {
                let _ = fs::remove_file(&path);
                if fs::hard_link(&src, &path).is_err() {
                    fs::copy(&src, &path).map_err(io_err(&src))?;
                }
                info
            }
            None => write_segment(&path, records)?,
        };
        segments.push(info);
    }
    sync_dir(&seg_dir);

    let manifest = Manifest {
        format: FORMAT,
        record_count: state.records.len(),
        watermark: state.watermark.clone(),
        digest: Manifest::segments_digest(&segments),
        segments,
    };
    let mut json = serde_json::to_vec_pretty(&manifest).expect("manifest serialises");
    json.push(b'\n');
    write_atomic(&dir.join(MANIFEST_FILE), &json)?;

    // drop segments left over from an earlier snapshot in the same directory
    let keep: BTreeSet<&str> = manifest.segments.iter().map(|s| s.name.as_str()).collect();
    if let Ok(entries) = fs::read_dir(&seg_dir) {
        for e in entries.flatten() {
            let name = e.file_name();
            if !keep.contains(name.to_string_lossy().as_ref()) {
                let _ = fs::remove_file(e.path());
            }
        }
    }
    Ok(manifest)
}

pub(crate) fn read_state(dir: &Path) -> Result<(State, Manifest), SnapshotError> {
    let manifest = Manifest::read(dir)?;
    let mpath = dir.join(MANIFEST_FILE);
    if manifest.format != FORMAT {
        return Err(corrupt(&mpath, format!("unsupported format {}", manifest.format)));
    }
    if Manifest::segments_digest(&manifest.segments) != manifest.digest {
        return Err(corrupt(&mpath, "manifest digest mismatch"));
    }
    let mut state = State::default();
    for seg in &manifest.segments {
        let path = dir.join(SEGMENT_DIR).join(&seg.name);
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        let actual = hex::encode(Sha256::digest(&bytes));
        if actual != seg.sha256 {
            return Err(corrupt(&path, format!("segment digest mismatch (manifest {}, file {actual})", seg.sha256)));
        }
        let mut n = 0;
        for (i, line) in BufReader::new(bytes.as_slice()).lines().enumerate() {
            let line = line.map_err(io_err(&path))?;
            let rec: EnrichedRecord = serde_json::from_str(&line)
                .map_err(|e| corrupt(&path, format!("line {}: {e}", i + 1)))?;
            state.insert(Arc::new(rec));
            n += 1;
        }
        if n != seg.records {
            return Err(corrupt(&path, format!("{n} records, manifest says {}", seg.records)));
        }
    }
    if state.records.len() != manifest.record_count {
        return Err(corrupt(&mpath, "record count mismatch"));
    }
    state.watermark = manifest.watermark.clone();
    state.dirty.clear();
    Ok((state, manifest))
}

impl FacetIndex {
    /// Writes a full snapshot of the current state into `dir`.
    pub fn snapshot(&self, dir: &Path) -> Result<Manifest, SnapshotError> {
        write_state(&self.read(), dir, None)
    }

    /// Loads a snapshot, refusing partial or tampered ones.
    pub fn restore(dir: &Path) -> Result<FacetIndex, SnapshotError> {
        let (state, _) = read_state(dir)?;
        Ok(FacetIndex {
            state: std::sync::RwLock::new(state),
        })
    }
}
