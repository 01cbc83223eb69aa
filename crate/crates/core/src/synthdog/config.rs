use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("bad override {0:?}: expected key=value")]
    Override(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Closed interval `[min, max]`. Written in config files as a two-element
/// array or as a single number meaning a fixed value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "RangeRepr<T>", into = "[T; 2]")]
pub struct Range<T: Copy> {
    pub min: T,
    pub max: T,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RangeRepr<T> {
    Pair([T; 2]),
    Fixed(T),
}

impl<T: Copy> From<RangeRepr<T>> for Range<T> {
    fn from(r: RangeRepr<T>) -> Self {
        match r {
            RangeRepr::Pair([min, max]) => Range { min, max },
            RangeRepr::Fixed(v) => Range { min: v, max: v },
        }
    }
}

impl<T: Copy> From<Range<T>> for [T; 2] {
    fn from(r: Range<T>) -> Self {
        [r.min, r.max]
    }
}

impl<T: Copy> Range<T> {
    pub const fn new(min: T, max: T) -> Self {
        Range { min, max }
    }

    pub const fn fixed(v: T) -> Self {
        Range { min: v, max: v }
    }
}

impl<T: Copy + PartialOrd + fmt::Debug> Range<T> {
    fn check(&self, name: &str, lo: T, hi: T) -> Result<(), ConfigError> {
        // Written so that NaN bounds fail too.
        let ordered = self.min <= self.max;
        let inside = self.min >= lo && self.max <= hi;
        if ordered && inside {
            Ok(())
        } else {
            Err(ConfigError::Invalid(format!(
                "{name} = [{:?}, {:?}] must satisfy {lo:?} <= min <= max <= {hi:?}",
                self.min, self.max
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CanvasConfig {
    pub width: Range<u32>,
    pub height: Range<u32>,
}

impl Default for CanvasConfig {
    fn default() -> Self {
        CanvasConfig {
            width: Range::fixed(512),
            height: Range::fixed(384),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssetConfig {
    /// Text files or directories; one document per file.
    pub corpus: Vec<PathBuf>,
    pub backgrounds: Vec<PathBuf>,
    pub textures: Vec<PathBuf>,
    /// TrueType/OpenType files or directories.
    pub fonts: Vec<PathBuf>,
    /// Substitute procedural backgrounds, a flat paper texture, the built-in
    /// bitmap font and the built-in word list for empty pools.
    pub procedural_fallback: bool,
}

impl Default for AssetConfig {
    fn default() -> Self {
        AssetConfig {
            corpus: Vec::new(),
            backgrounds: Vec::new(),
            textures: Vec::new(),
            fonts: Vec::new(),
            procedural_fallback: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DocumentConfig {
    /// Side of the upright document as a fraction of the canvas side.
    pub scale: Range<f64>,
}

impl Default for DocumentConfig {
    fn default() -> Self {
        DocumentConfig {
            scale: Range::new(0.8, 0.95),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutConfig {
    pub columns: Range<u32>,
    /// Text regions stacked in each column.
    pub rows: Range<u32>,
    /// Line pitch in document pixels; the font size is 80% of it.
    pub line_height: Range<f64>,
    pub margin: Range<f64>,
    /// Gutter between neighbouring regions.
    pub gap: Range<f64>,
    /// Relative weights of left, center and right alignment.
    pub align_weights: [f64; 3],
    /// Length of the contiguous word runs drawn from the corpus.
    pub phrase_length: Range<u32>,
    /// Upper bound on lines per region; 0 leaves it to the region height.
    pub max_lines: u32,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            columns: Range::new(1, 3),
            rows: Range::new(1, 3),
            line_height: Range::new(14.0, 26.0),
            margin: Range::new(8.0, 24.0),
            gap: Range::new(6.0, 16.0),
            align_weights: [0.7, 0.15, 0.15],
            phrase_length: Range::new(1, 8),
            max_lines: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EffectConfig {
    pub blur_sigma: Range<f64>,
    /// Standard deviation of additive Gaussian noise, in 8-bit levels.
    pub noise_std: Range<f64>,
    /// Corner displacement as a fraction of the document side.
    pub perspective: Range<f64>,
    /// Additive brightness shift in 8-bit levels.
    pub brightness: Range<f64>,
    /// Contrast gain around mid-grey.
    pub contrast: Range<f64>,
    pub shadow_probability: f64,
}

impl Default for EffectConfig {
    fn default() -> Self {
        EffectConfig {
            blur_sigma: Range::new(0.0, 1.0),
            noise_std: Range::new(0.0, 6.0),
            perspective: Range::new(0.0, 0.04),
            brightness: Range::new(-20.0, 20.0),
            contrast: Range::new(0.85, 1.15),
            shadow_probability: 0.3,
        }
    }
}

impl EffectConfig {
    /// Every effect disabled.
    pub fn none() -> Self {
        EffectConfig {
            blur_sigma: Range::fixed(0.0),
            noise_std: Range::fixed(0.0),
            perspective: Range::fixed(0.0),
            brightness: Range::fixed(0.0),
            contrast: Range::fixed(1.0),
            shadow_probability: 0.0,
        }
    }
}

/// Generator configuration, read from TOML. Every section and key is
/// optional and falls back to the defaults below.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub seed: u64,
    pub canvas: CanvasConfig,
    pub assets: AssetConfig,
    pub document: DocumentConfig,
    pub layout: LayoutConfig,
    pub effects: EffectConfig,
}

impl GenConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: GenConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Loads a config file, applies `key=value` overrides (dotted keys, TOML
    /// values; bare words are taken as strings) and validates the result.
    /// Relative asset paths resolve against the config file's directory.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut config: GenConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        if let Some(base) = path.parent() {
            config.assets.resolve_relative(base);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialization")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let c = &self.canvas;
        c.width.check("canvas.width", 64, 16384)?;
        c.height.check("canvas.height", 64, 16384)?;
        self.document.scale.check("document.scale", 0.1, 1.0)?;

        let l = &self.layout;
        l.columns.check("layout.columns", 1, 3)?;
        l.rows.check("layout.rows", 1, 64)?;
        l.line_height.check("layout.line_height", 6.0, 512.0)?;
        l.margin.check("layout.margin", 0.0, 4096.0)?;
        l.gap.check("layout.gap", 0.0, 4096.0)?;
        l.phrase_length.check("layout.phrase_length", 1, 1024)?;
        let w = &l.align_weights;
        if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || w.iter().sum::<f64>() <= 0.0 {
            return Err(ConfigError::Invalid(format!(
                "layout.align_weights = {w:?} must be non-negative with a positive sum"
            )));
        }

        let e = &self.effects;
        e.blur_sigma.check("effects.blur_sigma", 0.0, 20.0)?;
        e.noise_std.check("effects.noise_std", 0.0, 128.0)?;
        e.perspective.check("effects.perspective", 0.0, 0.25)?;
        e.brightness.check("effects.brightness", -255.0, 255.0)?;
        e.contrast.check("effects.contrast", 0.0, 10.0)?;
        Range::fixed(e.shadow_probability).check("effects.shadow_probability", 0.0, 1.0)?;
        Ok(())
    }
}

impl AssetConfig {
    fn resolve_relative(&mut self, base: &Path) {
        for list in [&mut self.corpus, &mut self.backgrounds, &mut self.textures, &mut self.fonts] {
            for p in list.iter_mut() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
    }
}

/// Sets `key` (dotted path into nested tables) to the TOML value on the
/// right of the first `=`.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), ConfigError> {
    let bad = || ConfigError::Override(assignment.to_string());
    let (key, raw) = assignment.split_once('=').ok_or_else(bad)?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(bad());
    }
    let value = match format!("v = {}", raw.trim()).parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.trim().to_string()),
    };

    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("non-empty key");
    let mut node = table;
    for part in parts {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry.as_table_mut().ok_or_else(bad)?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}
