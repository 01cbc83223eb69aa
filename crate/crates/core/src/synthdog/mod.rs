//! Seeded synthetic document generator.
//!
//! A document is composed from four parts: a background, a paper texture
//! warped onto a quadrilateral, text set in fonts, and a random column/row
//! layout. Photometric effects follow in a fixed order: warp, blur,
//! brightness/contrast, noise, shadow. [`Synthesizer::plan`] samples every
//! decision up front from a per-image seed, and [`Synthesizer::render`] turns
//! a plan into pixels plus reading-order ground truth.

mod config;
mod font;
mod generate;
mod geometry;
mod plan;
mod render;
mod seed;

use std::fmt;
use std::path::PathBuf;

use image::RgbImage;
use serde::Serialize;
use thiserror::Error;

pub use config::{
    apply_override, AssetConfig, CanvasConfig, ConfigError, DocumentConfig, EffectConfig, GenConfig,
    LayoutConfig, Range,
};
pub use font::FontFace;
pub use generate::{generate, DatasetSink, DirectorySink, GenerateError, MemorySink, Summary};
pub use geometry::{is_convex_clockwise, Homography, Point, Rect};
pub use plan::{
    Align, BackgroundSpec, EffectPlan, PlacedWord, RenderPlan, Shadow, TextLine, TextRegion, TextureSpec,
};
pub use render::{reading_vocab, AnnotatedWord, Annotation};
pub use seed::{image_seed, mix64};

use crate::corpus::{load_corpus, AssetError, AssetKind, AssetPool, CorpusError, CorpusSource};

/// Font id of the built-in bitmap face.
pub const BUILTIN_FONT: &str = "builtin-8x8";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolKind {
    Background,
    Texture,
    Font,
    Corpus,
}

impl fmt::Display for PoolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            PoolKind::Background => "background",
            PoolKind::Texture => "texture",
            PoolKind::Font => "font",
            PoolKind::Corpus => "corpus",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("{0} pool is empty and procedural fallbacks are disabled")]
    EmptyPool(PoolKind),
    #[error("asset {0:?} is not loaded")]
    AssetMissing(String),
    #[error("font {font:?} has no glyph for {codepoint:?}")]
    FontGlyphMissing { font: String, codepoint: char },
    #[error(transparent)]
    Asset(#[from] AssetError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("cannot decode image {path}: {source}")]
    Image {
        path: PathBuf,
        source: image::ImageError,
    },
    #[error("cannot load font {path}: {source}")]
    Font {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// A validated config with its corpus, images and fonts loaded. Planning and
/// rendering borrow it immutably and may run on many threads at once.
pub struct Synthesizer {
    config: GenConfig,
    corpus: CorpusSource,
    backgrounds: Vec<(String, RgbImage)>,
    textures: Vec<(String, RgbImage)>,
    fonts: Vec<(String, FontFace)>,
}

impl Synthesizer {
    pub fn new(config: GenConfig) -> Result<Self, SynthError> {
        let fallback = config.assets.procedural_fallback;
        let mut corpus = if config.assets.corpus.is_empty() {
            CorpusSource::builtin()
        } else {
            load_corpus(&config.assets.corpus)?
        };
        if corpus.fallback && !fallback {
            corpus.documents.clear();
        }
        let backgrounds = load_images(AssetKind::Background, &config.assets.backgrounds)?;
        let textures = load_images(AssetKind::Texture, &config.assets.textures)?;

        let pool = AssetPool::scan(AssetKind::Font, &config.assets.fonts)?;
        let mut fonts = Vec::with_capacity(pool.len());
        for entry in pool.entries {
            let face = FontFace::load(&entry.path).map_err(|source| SynthError::Font {
                path: entry.path.clone(),
                source,
            })?;
            fonts.push((entry.id, face));
        }
        if fonts.is_empty() && fallback {
            fonts.push((BUILTIN_FONT.to_string(), FontFace::Bitmap));
        }
        Ok(Synthesizer {
            config,
            corpus,
            backgrounds,
            textures,
            fonts,
        })
    }

    /// Replaces the corpus, e.g. with in-memory text.
    pub fn with_corpus(mut self, corpus: CorpusSource) -> Self {
        self.corpus = corpus;
        self
    }

    pub fn config(&self) -> &GenConfig {
        &self.config
    }

    pub fn corpus(&self) -> &CorpusSource {
        &self.corpus
    }

    pub fn font(&self, id: &str) -> Option<&FontFace> {
        self.fonts.iter().find(|(i, _)| i == id).map(|(_, f)| f)
    }

    pub fn font_ids(&self) -> impl Iterator<Item = &str> {
        self.fonts.iter().map(|(id, _)| id.as_str())
    }

    /// Plans and renders image `index`.
    pub fn sample(&self, index: u64) -> Result<(RgbImage, Annotation), SynthError> {
        self.render(&self.plan(index)?)
    }
}

fn load_images(kind: AssetKind, paths: &[PathBuf]) -> Result<Vec<(String, RgbImage)>, SynthError> {
    let pool = AssetPool::scan(kind, paths)?;
    pool.entries
        .into_iter()
        .map(|entry| {
            let img = image::open(&entry.path).map_err(|source| SynthError::Image {
                path: entry.path.clone(),
                source,
            })?;
            Ok((entry.id, img.into_rgb8()))
        })
        .collect()
}
