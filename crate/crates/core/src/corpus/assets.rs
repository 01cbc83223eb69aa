use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::expand_paths;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssetKind {
    Background,
    Texture,
    Font,
}

impl AssetKind {
    pub fn extensions(self) -> &'static [&'static str] {
        match self {
            AssetKind::Background | AssetKind::Texture => &["png", "jpg", "jpeg"],
            AssetKind::Font => &["ttf", "otf"],
        }
    }

    fn accepts(self, path: &Path) -> bool {
        path.extension()
            .and_then(|e| e.to_str())
            .map(|e| self.extensions().contains(&e.to_ascii_lowercase().as_str()))
            .unwrap_or(false)
    }
}

#[derive(Debug, Error)]
pub enum AssetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path} is not a {kind:?} file (expected one of {expected:?})")]
    BadExtension {
        kind: AssetKind,
        path: PathBuf,
        expected: &'static [&'static str],
    },
    #[error("asset id {0:?} appears twice")]
    DuplicateId(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssetEntry {
    pub id: String,
    pub path: PathBuf,
}

/// Files of one kind, addressed by id. Ids are paths relative to the listed
/// directory, or the file name for files listed directly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssetPool {
    pub kind: AssetKind,
    pub entries: Vec<AssetEntry>,
}

impl AssetPool {
    pub fn empty(kind: AssetKind) -> Self {
        AssetPool {
            kind,
            entries: Vec::new(),
        }
    }

    /// Directories contribute every file with a matching extension; files
    /// named directly must have one.
    pub fn scan<P: AsRef<Path>>(kind: AssetKind, paths: &[P]) -> Result<Self, AssetError> {
        let mut entries: Vec<AssetEntry> = Vec::new();
        for root in paths {
            let root = root.as_ref();
            let found = if root.is_dir() {
                expand_paths(&[root], |p| kind.accepts(p))
                    .map_err(|(path, source)| AssetError::Io { path, source })?
                    .into_iter()
                    .map(|p| {
                        let id = p.strip_prefix(root).unwrap_or(&p).to_string_lossy().into_owned();
                        AssetEntry { id, path: p }
                    })
                    .collect()
            } else {
                if !root.exists() {
                    return Err(AssetError::Io {
                        path: root.to_path_buf(),
                        source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
                    });
                }
                if !kind.accepts(root) {
                    return Err(AssetError::BadExtension {
                        kind,
                        path: root.to_path_buf(),
                        expected: kind.extensions(),
                    });
                }
                let id = root
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default();
                vec![AssetEntry {
                    id,
                    path: root.to_path_buf(),
                }]
            };
            for entry in found {
                if entries.iter().any(|e| e.id == entry.id) {
                    return Err(AssetError::DuplicateId(entry.id));
                }
                entries.push(entry);
            }
        }
        Ok(AssetPool { kind, entries })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, id: &str) -> Option<&AssetEntry> {
        self.entries.iter().find(|e| e.id == id)
    }
}
