//! Crash-safe persistent home of an index.
//!
//! Every commit writes a fresh `snapshot-<seq>` directory and then swaps the
//! `CURRENT` pointer file with a rename, so a crash at any point leaves the
//! previous committed snapshot in force. Segments whose PMID bucket did not
//! change since the previous commit are hard-linked rather than rewritten.

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use super::snapshot::{read_state, write_atomic, write_state, Manifest, Reuse, SnapshotError};
use super::FacetIndex;

const CURRENT: &str = "CURRENT";
const PREFIX: &str = "snapshot-";

#[derive(Debug, Clone)]
pub struct IndexStore {
    root: PathBuf,
}

impl IndexStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        IndexStore { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn current_name(&self) -> Result<Option<String>, SnapshotError> {
        let path = self.root.join(CURRENT);
        match fs::read_to_string(&path) {
            Ok(s) => Ok(Some(s.trim().to_string()).filter(|s| !s.is_empty())),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(SnapshotError::Io { path, source: e }),
        }
    }

    /// Directory of the committed snapshot, if any.
    pub fn current_dir(&self) -> Result<Option<PathBuf>, SnapshotError> {
        Ok(self.current_name()?.map(|n| self.root.join(n)))
    }

    pub fn exists(&self) -> bool {
        matches!(self.current_name(), Ok(Some(_)))
    }

    /// The committed index, or an empty one when nothing was committed yet.
    pub fn load(&self) -> Result<FacetIndex, SnapshotError> {
        match self.current_dir()? {
            None => Ok(FacetIndex::new()),
            Some(dir) => {
                let (mut state, manifest) = read_state(&dir)?;
                state.base = Some(manifest.digest);
                Ok(FacetIndex {
                    state: std::sync::RwLock::new(state),
                })
            }
        }
    }

    /// Like [`load`](Self::load) but an absent snapshot is an error.
    pub fn load_existing(&self) -> Result<FacetIndex, SnapshotError> {
        match self.current_dir()? {
            None => Err(SnapshotError::MissingManifest(self.root.clone())),
            Some(_) => self.load(),
        }
    }

    /// Persists `index` as the new committed snapshot.
    pub fn commit(&self, index: &FacetIndex) -> Result<Manifest, SnapshotError> {
        fs::create_dir_all(&self.root).map_err(|e| SnapshotError::Io {
            path: self.root.clone(),
            source: e,
        })?;
        let current = self.current_name()?;
        let seq = current
            .as_deref()
            .and_then(|n| n.strip_prefix(PREFIX))
            .and_then(|s| s.parse::<u64>().ok())
            .map_or(1, |s| s + 1);
        let name = format!("{PREFIX}{seq:06}");
        let dir = self.root.join(&name);
        if dir.exists() {
            // debris of a commit that crashed before the pointer swap
            fs::remove_dir_all(&dir).map_err(|e| SnapshotError::Io {
                path: dir.clone(),
                source: e,
            })?;
        }

        let (manifest, dirty) = {
            let state = index.read();
            let prev_dir = current.as_ref().map(|c| self.root.join(c));
            let prev = match &prev_dir {
                Some(d) if state.base.is_some() => Manifest::read(d).ok().filter(|m| Some(&m.digest) == state.base.as_ref()),
                _ => None,
            };
            let dirty = state.dirty.clone();
            let reuse = match (&prev_dir, &prev) {
                (Some(d), Some(m)) => Some(Reuse {
                    dir: d,
                    manifest: m,
                    dirty: &dirty,
                }),
                _ => None,
            };
            (write_state(&state, &dir, reuse)?, dirty)
        };

        write_atomic(&self.root.join(CURRENT), format!("{name}\n").as_bytes())?;
        {
            let mut state = index.write();
            state.base = Some(manifest.digest.clone());
            let still_dirty: BTreeSet<u64> = state.dirty.difference(&dirty).copied().collect();
            state.dirty = still_dirty;
        }
        self.prune(&name);
        Ok(manifest)
    }

    /// Removes every snapshot directory except `keep`.
    fn prune(&self, keep: &str) {
        let Ok(entries) = fs::read_dir(&self.root) else {
            return;
        };
        for e in entries.flatten() {
            let name = e.file_name();
            let name = name.to_string_lossy();
            if name.starts_with(PREFIX) && name != keep {
                let _ = fs::remove_dir_all(e.path());
            }
        }
    }
}
