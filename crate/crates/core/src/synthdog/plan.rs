use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::Range;
use super::geometry::{is_convex_clockwise, Homography, Point, Rect};
use super::seed;
use super::{PoolKind, SynthError, Synthesizer};
use crate::corpus::CorpusSource;

/// Font size as a fraction of the line pitch.
const FONT_TO_LINE: f64 = 0.8;
/// Consecutive unusable words after which a line is closed.
const MAX_SKIPS: usize = 64;
/// Smallest usable content side, in document pixels.
const MIN_CONTENT: f64 = 16.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackgroundSpec {
    /// Pool image scaled to cover the canvas, cropped at a fractional offset.
    Image { id: String, offset: (f64, f64) },
    /// Value noise blended between two colors.
    Noise { seed: u64, cell: f64, colors: [[u8; 3]; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TextureSpec {
    /// Pool image tiled from a pixel offset.
    Image { id: String, offset: (u32, u32) },
    Flat { color: [u8; 3] },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Align {
    Left,
    Center,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacedWord {
    pub text: String,
    /// Pen position on the baseline.
    pub origin: Point,
    /// Tight ink box in document pixels.
    pub bbox: Rect,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TextLine {
    pub top: f64,
    pub bottom: f64,
    pub baseline: f64,
    pub words: Vec<PlacedWord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TextRegion {
    pub rect: Rect,
    pub font: String,
    pub font_size: f64,
    pub color: [u8; 3],
    pub align: Align,
    pub lines: Vec<TextLine>,
}

/// Soft darkening of the half-plane beyond a line through the canvas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Shadow {
    /// Direction of the half-plane normal, radians.
    pub angle: f64,
    /// Signed distance of the edge from the canvas center.
    pub offset: f64,
    /// Width of the penumbra.
    pub softness: f64,
    /// Darkening at full shadow, in `[0, 1]`.
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectPlan {
    pub blur_sigma: f64,
    pub brightness: f64,
    pub contrast: f64,
    pub noise_std: f64,
    pub noise_seed: u64,
    pub shadow: Option<Shadow>,
}

/// Every sampled decision for one image. Rendering a plan draws no further
/// randomness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenderPlan {
    pub index: u64,
    pub seed: u64,
    pub canvas: (u32, u32),
    /// Upright document size in pixels.
    pub document: (u32, u32),
    /// Where the document corners land on the canvas, clockwise from
    /// top-left.
    pub quad: [Point; 4],
    pub background: BackgroundSpec,
    pub texture: TextureSpec,
    /// In reading order.
    pub regions: Vec<TextRegion>,
    pub effects: EffectPlan,
}

impl RenderPlan {
    pub fn document_rect(&self) -> Rect {
        Rect::new(0.0, 0.0, self.document.0 as f64, self.document.1 as f64)
    }

    /// Document-to-canvas map.
    pub fn homography(&self) -> Homography {
        Homography::rect_to_quad(&self.document_rect(), &self.quad).expect("plan quad is non-degenerate")
    }

    pub fn words(&self) -> impl Iterator<Item = &PlacedWord> {
        self.regions
            .iter()
            .flat_map(|r| r.lines.iter())
            .flat_map(|l| l.words.iter())
    }

    pub fn word_count(&self) -> usize {
        self.words().count()
    }
}

pub(super) fn uniform_f(rng: &mut ChaCha8Rng, r: Range<f64>) -> f64 {
    if r.min >= r.max {
        r.min
    } else {
        rng.gen_range(r.min..=r.max)
    }
}

fn uniform_u(rng: &mut ChaCha8Rng, r: Range<u32>) -> u32 {
    if r.min >= r.max {
        r.min
    } else {
        rng.gen_range(r.min..=r.max)
    }
}

/// Contiguous word runs ("phrases") from random corpus positions, wrapping
/// at document ends.
struct PhraseStream<'a> {
    documents: Vec<&'a [String]>,
    lengths: Range<u32>,
    doc: usize,
    pos: usize,
    remaining: u32,
}

impl<'a> PhraseStream<'a> {
    fn new(corpus: &'a CorpusSource, lengths: Range<u32>) -> Self {
        PhraseStream {
            documents: corpus
                .documents
                .iter()
                .filter(|d| !d.is_empty())
                .map(Vec::as_slice)
                .collect(),
            lengths,
            doc: 0,
            pos: 0,
            remaining: 0,
        }
    }

    fn next(&mut self, rng: &mut ChaCha8Rng) -> &'a str {
        if self.remaining == 0 {
            self.doc = rng.gen_range(0..self.documents.len());
            self.pos = rng.gen_range(0..self.documents[self.doc].len());
            self.remaining = uniform_u(rng, self.lengths);
        }
        let doc = self.documents[self.doc];
        let word = &doc[self.pos];
        self.pos = (self.pos + 1) % doc.len();
        self.remaining -= 1;
        word
    }
}

/// Splits `[start, start + total)` into `n` spans with random relative sizes
/// separated by `gap`. Boundaries are whole pixels so that pixel-snapped ink
/// boxes can be tested against them exactly.
fn split(rng: &mut ChaCha8Rng, start: f64, total: f64, n: usize, gap: f64) -> Vec<(f64, f64)> {
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.6..1.4)).collect();
    let sum: f64 = weights.iter().sum();
    let usable = total - gap * (n - 1) as f64;
    let mut spans = Vec::with_capacity(n);
    let mut cursor = start;
    for (i, w) in weights.iter().enumerate() {
        let end = if i + 1 == n { start + total } else { (cursor + usable * w / sum).round() };
        spans.push((cursor, end));
        cursor = end + gap;
    }
    spans
}

impl Synthesizer {
    /// Samples every random decision for image `index`. Pure in
    /// `(config, index)`.
    pub fn plan(&self, index: u64) -> Result<RenderPlan, SynthError> {
        let cfg = &self.config;
        let seed = seed::image_seed(cfg.seed, index);
        let mut rng = seed::rng(seed);

        let width = uniform_u(&mut rng, cfg.canvas.width);
        let height = uniform_u(&mut rng, cfg.canvas.height);
        let scale = uniform_f(&mut rng, cfg.document.scale);
        let dw = ((width as f64 * scale).round() as u32).clamp(32, width);
        let dh = ((height as f64 * scale).round() as u32).clamp(32, height);
        let quad = self.sample_quad(&mut rng, (width, height), (dw, dh));

        let background = if !self.backgrounds.is_empty() {
            let i = rng.gen_range(0..self.backgrounds.len());
            BackgroundSpec::Image {
                id: self.backgrounds[i].0.clone(),
                offset: (rng.gen(), rng.gen()),
            }
        } else if cfg.assets.procedural_fallback {
            let mut color = |lo: u8, hi: u8| -> [u8; 3] { [0; 3].map(|_| rng.gen_range(lo..=hi)) };
            let colors = [color(20, 140), color(60, 200)];
            BackgroundSpec::Noise {
                seed: rng.gen(),
                cell: rng.gen_range(24.0..96.0),
                colors,
            }
        } else {
            return Err(SynthError::EmptyPool(PoolKind::Background));
        };

        let texture = if !self.textures.is_empty() {
            let i = rng.gen_range(0..self.textures.len());
            TextureSpec::Image {
                id: self.textures[i].0.clone(),
                offset: (rng.gen_range(0..1024), rng.gen_range(0..1024)),
            }
        } else if cfg.assets.procedural_fallback {
            let base: u8 = rng.gen_range(232..=250);
            TextureSpec::Flat {
                color: [base + rng.gen_range(0..=5), base + rng.gen_range(0..=4), base],
            }
        } else {
            return Err(SynthError::EmptyPool(PoolKind::Texture));
        };

        if self.fonts.is_empty() {
            return Err(SynthError::EmptyPool(PoolKind::Font));
        }
        if self.corpus.word_count() == 0 {
            return Err(SynthError::EmptyPool(PoolKind::Corpus));
        }
        let regions = self.sample_layout(&mut rng, (dw as f64, dh as f64));

        let fx = &cfg.effects;
        let blur_sigma = uniform_f(&mut rng, fx.blur_sigma);
        let brightness = uniform_f(&mut rng, fx.brightness);
        let contrast = uniform_f(&mut rng, fx.contrast);
        let noise_std = uniform_f(&mut rng, fx.noise_std);
        let noise_seed = rng.gen();
        let shadow = rng.gen_bool(fx.shadow_probability).then(|| {
            let diag = (width as f64).hypot(height as f64);
            Shadow {
                angle: rng.gen_range(0.0..std::f64::consts::TAU),
                offset: rng.gen_range(-0.4..0.4) * diag,
                softness: rng.gen_range(0.05..0.3) * diag,
                strength: rng.gen_range(0.15..0.45),
            }
        });

        Ok(RenderPlan {
            index,
            seed,
            canvas: (width, height),
            document: (dw, dh),
            quad,
            background,
            texture,
            regions,
            effects: EffectPlan {
                blur_sigma,
                brightness,
                contrast,
                noise_std,
                noise_seed,
                shadow,
            },
        })
    }

    fn sample_quad(&self, rng: &mut ChaCha8Rng, canvas: (u32, u32), doc: (u32, u32)) -> [Point; 4] {
        let (w, h) = (canvas.0 as f64, canvas.1 as f64);
        let (dw, dh) = (doc.0 as f64, doc.1 as f64);
        let ox = rng.gen_range(0.0..=w - dw);
        let oy = rng.gen_range(0.0..=h - dh);
        let upright = Rect::new(ox, oy, ox + dw, oy + dh).corners();
        let jitter = uniform_f(rng, self.config.effects.perspective);
        let jittered = upright.map(|p| {
            let jx = rng.gen_range(-1.0..=1.0) * jitter * dw;
            let jy = rng.gen_range(-1.0..=1.0) * jitter * dh;
            Point::new((p.x + jx).clamp(0.0, w), (p.y + jy).clamp(0.0, h))
        });
        if jitter > 0.0 && is_convex_clockwise(&jittered) {
            jittered
        } else {
            upright
        }
    }

    fn sample_layout(&self, rng: &mut ChaCha8Rng, doc: (f64, f64)) -> Vec<TextRegion> {
        let layout = &self.config.layout;
        let margin = uniform_f(rng, layout.margin)
            .min(((doc.0.min(doc.1) - MIN_CONTENT) / 2.0).max(0.0))
            .round();
        let content = Rect::new(margin, margin, doc.0 - margin, doc.1 - margin);
        let gap = uniform_f(rng, layout.gap).round();

        let mut columns = uniform_u(rng, layout.columns) as usize;
        while columns > 1 && (content.width() - gap * (columns - 1) as f64) < MIN_CONTENT * columns as f64 {
            columns -= 1;
        }
        let mut stream = PhraseStream::new(&self.corpus, layout.phrase_length);
        let align_dist = WeightedIndex::new(layout.align_weights).expect("validated weights");

        let mut regions = Vec::new();
        for (left, right) in split(rng, content.left, content.width(), columns, gap) {
            let mut rows = uniform_u(rng, layout.rows) as usize;
            while rows > 1 && (content.height() - gap * (rows - 1) as f64) < MIN_CONTENT * rows as f64 {
                rows -= 1;
            }
            for (top, bottom) in split(rng, content.top, content.height(), rows, gap) {
                let rect = Rect::new(left, top, right, bottom);
                let align = [Align::Left, Align::Center, Align::Right][align_dist.sample(rng)];
                if let Some(region) = self.fill_region(rng, &mut stream, rect, align) {
                    regions.push(region);
                }
            }
        }
        regions.sort_by(|a, b| {
            a.rect
                .top
                .total_cmp(&b.rect.top)
                .then(a.rect.left.total_cmp(&b.rect.left))
        });
        regions
    }

    fn fill_region(
        &self,
        rng: &mut ChaCha8Rng,
        stream: &mut PhraseStream<'_>,
        rect: Rect,
        align: Align,
    ) -> Option<TextRegion> {
        let layout = &self.config.layout;
        let line_height = uniform_f(rng, layout.line_height);
        let (font_id, font) = &self.fonts[rng.gen_range(0..self.fonts.len())];
        let color = [0; 3].map(|_| rng.gen_range(0..=90u8));
        let size = line_height * FONT_TO_LINE;

        let mut lines_fit = (rect.height() / line_height).floor() as usize;
        if layout.max_lines > 0 {
            lines_fit = lines_fit.min(layout.max_lines as usize);
        }
        if lines_fit == 0 {
            return None;
        }
        let ascent = font.ascent(size);
        let descent = font.descent(size);
        let space = font.space_advance(size);
        let pad = ((line_height - ascent - descent) / 2.0).max(0.0);

        let mut lines = Vec::new();
        let mut pending: Option<&str> = None;
        for k in 0..lines_fit {
            let top = rect.top + k as f64 * line_height;
            let bottom = top + line_height;
            let baseline = top + pad + ascent;

            // Greedy fill: (word, offset from line start, advance).
            let mut run: Vec<(&str, f64)> = Vec::new();
            let mut used = 0.0;
            let mut skips = 0;
            while skips < MAX_SKIPS {
                let word = pending.take().unwrap_or_else(|| stream.next(rng));
                let advance = font.advance(word, size);
                if font.missing_glyph(word).is_some() || advance.is_nan() || advance <= 0.0 || advance > rect.width() {
                    skips += 1;
                    continue;
                }
                let offset = if run.is_empty() { 0.0 } else { used + space };
                if offset + advance > rect.width() {
                    pending = Some(word);
                    break;
                }
                run.push((word, offset));
                used = offset + advance;
            }

            let shift = match align {
                Align::Left => 0.0,
                Align::Center => (rect.width() - used) / 2.0,
                Align::Right => rect.width() - used,
            };
            let words: Vec<PlacedWord> = run
                .into_iter()
                .filter_map(|(word, offset)| {
                    let origin = Point::new(rect.left + shift + offset, baseline);
                    let bbox = font.ink_box(word, size, origin)?;
                    let middle = (bbox.top + bbox.bottom) / 2.0;
                    let fits = rect.contains(&bbox) && middle >= top && middle < bottom;
                    fits.then(|| PlacedWord {
                        text: word.to_string(),
                        origin,
                        bbox,
                    })
                })
                .collect();
            if !words.is_empty() {
                lines.push(TextLine {
                    top,
                    bottom,
                    baseline,
                    words,
                });
            }
        }
        if lines.is_empty() {
            return None;
        }
        Some(TextRegion {
            rect,
            font: font_id.clone(),
            font_size: size,
            color,
            align,
            lines,
        })
    }
}
