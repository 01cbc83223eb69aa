use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{ExtendedColorType, ImageEncoder, RgbImage};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::render::Annotation;
use super::{SynthError, Synthesizer};
use crate::corpus::ManifestWriter;

/// Receives finished samples, possibly from several threads at once.
pub trait DatasetSink: Sync {
    fn write(&self, index: u64, image: &RgbImage, annotation: &Annotation) -> io::Result<()>;
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("sample {index}: {source}")]
    Sample { index: u64, source: SynthError },
    #[error("sample {index}: write failed: {source}")]
    Write { index: u64, source: io::Error },
    #[error("cannot start worker threads: {0}")]
    Threads(String),
}

impl GenerateError {
    pub fn index(&self) -> Option<u64> {
        match self {
            GenerateError::Sample { index, .. } | GenerateError::Write { index, .. } => Some(*index),
            GenerateError::Threads(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub images: u64,
    pub words: u64,
}

/// Generates samples `0..count` on `threads` workers (0 = one per core).
/// Each index is independent, so the output does not depend on `threads`.
/// On failure the error with the lowest index is returned.
pub fn generate(
    synth: &Synthesizer,
    count: u64,
    threads: usize,
    sink: &dyn DatasetSink,
    progress: Option<&(dyn Fn(u64, u64) + Sync)>,
) -> Result<Summary, GenerateError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| GenerateError::Threads(e.to_string()))?;
    let done = AtomicU64::new(0);
    let results: Vec<Result<usize, GenerateError>> = pool.install(|| {
        (0..count)
            .into_par_iter()
            .map(|index| {
                let (image, annotation) = synth
                    .sample(index)
                    .map_err(|source| GenerateError::Sample { index, source })?;
                sink.write(index, &image, &annotation)
                    .map_err(|source| GenerateError::Write { index, source })?;
                let finished = done.fetch_add(1, Ordering::Relaxed) + 1;
                if let Some(report) = progress {
                    report(finished, count);
                }
                Ok(annotation.words.len())
            })
            .collect()
    });
    let mut summary = Summary::default();
    for r in results {
        summary.words += r? as u64;
        summary.images += 1;
    }
    Ok(summary)
}

/// Writes `images/{index:08}.png` and `metadata.jsonl` under one directory.
pub struct DirectorySink {
    root: PathBuf,
    manifest: ManifestWriter,
}

impl DirectorySink {
    pub fn create(root: impl Into<PathBuf>) -> io::Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(root.join("images"))?;
        let manifest = ManifestWriter::create(root.join("metadata.jsonl"))?;
        Ok(DirectorySink { root, manifest })
    }

    pub fn file_name(index: u64) -> String {
        format!("images/{index:08}.png")
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Flushes the manifest in `file_name` order and returns its path.
    pub fn finish(self) -> io::Result<PathBuf> {
        self.manifest.finish()
    }
}

impl DatasetSink for DirectorySink {
    fn write(&self, index: u64, image: &RgbImage, annotation: &Annotation) -> io::Result<()> {
        let file_name = Self::file_name(index);
        let out = BufWriter::new(File::create(self.root.join(&file_name))?);
        PngEncoder::new_with_quality(out, CompressionType::Fast, FilterType::Adaptive)
            .write_image(image.as_raw(), image.width(), image.height(), ExtendedColorType::Rgb8)
            .map_err(io::Error::other)?;
        self.manifest.append(&annotation.to_record(file_name))
    }
}

/// Keeps samples in memory, keyed by index.
#[derive(Default)]
pub struct MemorySink {
    samples: Mutex<BTreeMap<u64, (RgbImage, Annotation)>>,
}

impl MemorySink {
    pub fn new() -> Self {
        Self::default()
    }

    /// Samples in index order.
    pub fn into_samples(self) -> Vec<(u64, RgbImage, Annotation)> {
        self.samples
            .into_inner()
            .expect("memory sink poisoned")
            .into_iter()
            .map(|(i, (img, ann))| (i, img, ann))
            .collect()
    }
}

impl DatasetSink for MemorySink {
    fn write(&self, index: u64, image: &RgbImage, annotation: &Annotation) -> io::Result<()> {
        self.samples
            .lock()
            .expect("memory sink poisoned")
            .insert(index, (image.clone(), annotation.clone()));
        Ok(())
    }
}
