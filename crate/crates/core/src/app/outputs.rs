//! All-or-nothing artifact writing.
//!
//! A command collects every file it produces in memory and hands the batch
//! to [`Staged::commit`]. Files are first written under temporary names and
//! only renamed into place once every write has succeeded, so a failing run
//! never leaves a partial set of artifacts behind.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Default)]
pub struct Staged {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Staged {
    pub fn new() -> Self {
        Self::default()
    }

    /// Queues `data` for `rel`, a path relative to the output directory.
    pub fn add(&mut self, rel: impl Into<PathBuf>, data: impl Into<Vec<u8>>) {
        let rel = rel.into();
        self.files.retain(|(p, _)| *p != rel);
        self.files.push((rel, data.into()));
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    /// Writes the batch under `root` and returns the final paths.
    pub fn commit(self, root: &Path) -> Result<Vec<PathBuf>> {
        let mut pending: Vec<(PathBuf, PathBuf)> = Vec::with_capacity(self.files.len());
        let cleanup = |pending: &[(PathBuf, PathBuf)]| {
            for (tmp, _) in pending {
                let _ = fs::remove_file(tmp);
            }
        };
        for (rel, data) in &self.files {
            let dest = root.join(rel);
            let tmp = temp_name(&dest);
            let written = dest
                .parent()
                .map_or(Ok(()), fs::create_dir_all)
                .and_then(|_| fs::write(&tmp, data));
            if let Err(e) = written {
                cleanup(&pending);
                let _ = fs::remove_file(&tmp);
                return Err(Error::io(&dest, e));
            }
            pending.push((tmp, dest));
        }
        for (i, (tmp, dest)) in pending.iter().enumerate() {
            if let Err(e) = fs::rename(tmp, dest) {
                cleanup(&pending[i..]);
                return Err(Error::io(dest, e));
            }
        }
        Ok(pending.into_iter().map(|(_, dest)| dest).collect())
    }
}

fn temp_name(dest: &Path) -> PathBuf {
    let name = dest.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    dest.with_file_name(format!(".{name}.partial"))
}
