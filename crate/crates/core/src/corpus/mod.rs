//! Loading and persisting external resources: text corpora, asset pools,
//! JSON documents and dataset manifests.

mod assets;
mod doctree;
mod manifest;
mod text;

use std::io;
use std::path::{Path, PathBuf};

pub use assets::{AssetEntry, AssetError, AssetKind, AssetPool};
pub use doctree::{load_doctree, parse_doctree, parse_raw_doctree, DocTreeError};
pub use manifest::{
    read_manifest, validate_manifest, GroundTruth, ManifestRecord, ManifestWriter, Quad,
    TextSequence, ValidationReport, Violation, ViolationKind, WordRecord,
};
pub use text::{load_corpus, tokenize, CorpusError, CorpusSource, FALLBACK_WORDS};

/// Files under `paths` in a stable order: listed files as given, directory
/// contents recursively sorted by path. Directory entries must pass `keep`.
pub(crate) fn expand_paths<P: AsRef<Path>>(
    paths: &[P],
    keep: impl Fn(&Path) -> bool,
) -> Result<Vec<PathBuf>, (PathBuf, io::Error)> {
    fn walk(
        dir: &Path,
        keep: &dyn Fn(&Path) -> bool,
        out: &mut Vec<PathBuf>,
    ) -> Result<(), (PathBuf, io::Error)> {
        let err = |e| (dir.to_path_buf(), e);
        let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(err)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        entries.sort();
        for path in entries {
            if path.is_dir() {
                walk(&path, keep, out)?;
            } else if keep(&path) {
                out.push(path);
            }
        }
        Ok(())
    }

    let mut out = Vec::new();
    for p in paths {
        let p = p.as_ref();
        if p.is_dir() {
            walk(p, &keep, &mut out)?;
        } else {
            out.push(p.to_path_buf());
        }
    }
    Ok(out)
}
