use image::imageops::{self, FilterType};
use image::{Rgb, RgbImage};
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use super::geometry::{Homography, Point};
use super::plan::{BackgroundSpec, EffectPlan, RenderPlan, Shadow, TextureSpec};
use super::seed::{self, mix64};
use super::{SynthError, Synthesizer};
use crate::codec::{encode, DocTree, TokenSeq, Value, Vocab};
use crate::corpus::{GroundTruth, ManifestRecord, Quad, TextSequence, WordRecord};

/// Blur below this sigma is a no-op.
const MIN_BLUR_SIGMA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnotatedWord {
    pub text: String,
    /// Final image coordinates, clockwise from top-left, rounded to 0.01 px.
    pub quad: Quad,
    /// Position in the reading order: region, then line within the region.
    pub region: usize,
    pub line: usize,
}

/// Ground truth for one image.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Annotation {
    /// Words in reading order joined by single spaces.
    pub text: String,
    pub words: Vec<AnnotatedWord>,
    /// `{"text_sequence": text}`.
    pub gt_parse: DocTree,
    pub target: TokenSeq,
}

impl Annotation {
    pub fn to_record(&self, file_name: impl Into<String>) -> ManifestRecord {
        ManifestRecord {
            file_name: file_name.into(),
            ground_truth: GroundTruth {
                gt_parse: TextSequence {
                    text_sequence: self.text.clone(),
                },
            },
            words: self
                .words
                .iter()
                .map(|w| WordRecord {
                    text: w.text.clone(),
                    quad: w.quad,
                })
                .collect(),
        }
    }
}

/// The vocabulary of the reading target: the one `text_sequence` field.
pub fn reading_vocab() -> Vocab {
    Vocab::new(["text_sequence"], [], [], 0).expect("static vocabulary")
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

impl Synthesizer {
    /// Draws a plan. Deterministic: the same plan always yields the same
    /// pixels and annotation.
    pub fn render(&self, plan: &RenderPlan) -> Result<(RgbImage, Annotation), SynthError> {
        let mut canvas = self.paint_background(plan)?;
        let mut doc = self.paint_texture(plan)?;

        for region in &plan.regions {
            let font = self
                .font(&region.font)
                .ok_or_else(|| SynthError::AssetMissing(region.font.clone()))?;
            let color = region.color.map(f32::from);
            for word in region.lines.iter().flat_map(|l| &l.words) {
                if let Some(c) = font.missing_glyph(&word.text) {
                    return Err(SynthError::FontGlyphMissing {
                        font: region.font.clone(),
                        codepoint: c,
                    });
                }
                font.rasterize(&word.text, region.font_size, word.origin, |x, y, cov| {
                    blend(&mut doc, x, y, color, cov);
                });
            }
        }

        let hom = plan.homography();
        warp(&doc, &mut canvas, &hom);
        apply_effects(&mut canvas, &plan.effects);

        Ok((canvas, annotate(plan, &hom)))
    }

    fn paint_background(&self, plan: &RenderPlan) -> Result<RgbImage, SynthError> {
        let (w, h) = plan.canvas;
        match &plan.background {
            BackgroundSpec::Image { id, offset } => {
                let src = lookup(&self.backgrounds, id)?;
                let (iw, ih) = src.dimensions();
                let s = (w as f64 / iw as f64).max(h as f64 / ih as f64);
                let rw = ((iw as f64 * s).ceil() as u32).max(w);
                let rh = ((ih as f64 * s).ceil() as u32).max(h);
                let scaled;
                let covered = if (rw, rh) == (iw, ih) {
                    src
                } else {
                    scaled = imageops::resize(src, rw, rh, FilterType::Triangle);
                    &scaled
                };
                let ox = ((rw - w) as f64 * offset.0).floor() as u32;
                let oy = ((rh - h) as f64 * offset.1).floor() as u32;
                Ok(imageops::crop_imm(covered, ox, oy, w, h).to_image())
            }
            BackgroundSpec::Noise { seed, cell, colors } => Ok(value_noise(w, h, *seed, *cell, colors)),
        }
    }

    fn paint_texture(&self, plan: &RenderPlan) -> Result<RgbImage, SynthError> {
        let (w, h) = plan.document;
        match &plan.texture {
            TextureSpec::Image { id, offset } => {
                let src = lookup(&self.textures, id)?;
                let (tw, th) = src.dimensions();
                Ok(RgbImage::from_fn(w, h, |x, y| {
                    *src.get_pixel((x + offset.0) % tw, (y + offset.1) % th)
                }))
            }
            TextureSpec::Flat { color } => Ok(RgbImage::from_pixel(w, h, Rgb(*color))),
        }
    }
}

fn lookup<'a>(pool: &'a [(String, RgbImage)], id: &str) -> Result<&'a RgbImage, SynthError> {
    pool.iter()
        .find(|(i, _)| i == id)
        .map(|(_, img)| img)
        .ok_or_else(|| SynthError::AssetMissing(id.to_string()))
}

fn blend(img: &mut RgbImage, x: i64, y: i64, color: [f32; 3], alpha: f32) {
    if x < 0 || y < 0 || x >= img.width() as i64 || y >= img.height() as i64 {
        return;
    }
    let p = img.get_pixel_mut(x as u32, y as u32);
    for (c, ink) in p.0.iter_mut().zip(color) {
        *c = (*c as f32 * (1.0 - alpha) + ink * alpha).round().clamp(0.0, 255.0) as u8;
    }
}

/// Three octaves of smoothed lattice noise mapped between two colors.
fn value_noise(w: u32, h: u32, seed: u64, cell: f64, colors: &[[u8; 3]; 2]) -> RgbImage {
    struct Octave {
        cell: f64,
        cols: usize,
        grid: Vec<f64>,
        weight: f64,
    }
    let octaves: Vec<Octave> = [(1.0, 0.57), (0.5, 0.29), (0.25, 0.14)]
        .iter()
        .enumerate()
        .map(|(k, &(f, weight))| {
            let cell = (cell * f).max(2.0);
            let cols = (w as f64 / cell).ceil() as usize + 2;
            let rows = (h as f64 / cell).ceil() as usize + 2;
            let s = seed::stream_seed(seed, k as u64);
            let grid = (0..cols * rows)
                .map(|i| (mix64(s ^ i as u64) >> 11) as f64 / (1u64 << 53) as f64)
                .collect();
            Octave {
                cell,
                cols,
                grid,
                weight,
            }
        })
        .collect();
    let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
    let [a, b] = colors.map(|c| c.map(f64::from));
    RgbImage::from_fn(w, h, |x, y| {
        let mut v = 0.0;
        for o in &octaves {
            let (fx, fy) = (x as f64 / o.cell, y as f64 / o.cell);
            let (ix, iy) = (fx as usize, fy as usize);
            let (tx, ty) = (smooth(fx.fract()), smooth(fy.fract()));
            let at = |cx: usize, cy: usize| o.grid[cy * o.cols + cx];
            let top = at(ix, iy) * (1.0 - tx) + at(ix + 1, iy) * tx;
            let bottom = at(ix, iy + 1) * (1.0 - tx) + at(ix + 1, iy + 1) * tx;
            v += o.weight * (top * (1.0 - ty) + bottom * ty);
        }
        Rgb([0, 1, 2].map(|c| (a[c] + (b[c] - a[c]) * v).round().clamp(0.0, 255.0) as u8))
    })
}

/// Inverse-maps every canvas pixel inside the document quad and samples
/// the upright document bilinearly.
fn warp(doc: &RgbImage, canvas: &mut RgbImage, hom: &Homography) {
    let inv = hom.inverse().expect("plan quad is non-degenerate");
    let (dw, dh) = (doc.width() as f64, doc.height() as f64);
    let corners = [(0.0, 0.0), (dw, 0.0), (dw, dh), (0.0, dh)].map(|(x, y)| hom.apply(Point::new(x, y)));
    let x0 = corners.iter().map(|p| p.x).fold(f64::INFINITY, f64::min).floor().max(0.0) as u32;
    let y0 = corners.iter().map(|p| p.y).fold(f64::INFINITY, f64::min).floor().max(0.0) as u32;
    let x1 = (corners.iter().map(|p| p.x).fold(0.0, f64::max).ceil() as u32).min(canvas.width());
    let y1 = (corners.iter().map(|p| p.y).fold(0.0, f64::max).ceil() as u32).min(canvas.height());

    let max_x = doc.width() - 1;
    let max_y = doc.height() - 1;
    for y in y0..y1 {
        for x in x0..x1 {
            let p = inv.apply(Point::new(x as f64 + 0.5, y as f64 + 0.5));
            if !(p.x >= 0.0 && p.x < dw && p.y >= 0.0 && p.y < dh) {
                continue;
            }
            let (u, v) = ((p.x - 0.5).max(0.0), (p.y - 0.5).max(0.0));
            let (u0, v0) = ((u as u32).min(max_x), (v as u32).min(max_y));
            let (u1, v1) = ((u0 + 1).min(max_x), (v0 + 1).min(max_y));
            let (fu, fv) = (u - u0 as f64, v - v0 as f64);
            let (p00, p10) = (doc.get_pixel(u0, v0).0, doc.get_pixel(u1, v0).0);
            let (p01, p11) = (doc.get_pixel(u0, v1).0, doc.get_pixel(u1, v1).0);
            let out = canvas.get_pixel_mut(x, y);
            for c in 0..3 {
                let top = p00[c] as f64 * (1.0 - fu) + p10[c] as f64 * fu;
                let bottom = p01[c] as f64 * (1.0 - fu) + p11[c] as f64 * fu;
                out.0[c] = (top * (1.0 - fv) + bottom * fv).round().clamp(0.0, 255.0) as u8;
            }
        }
    }
}

fn apply_effects(canvas: &mut RgbImage, fx: &EffectPlan) {
    if fx.blur_sigma >= MIN_BLUR_SIGMA {
        *canvas = imageops::blur(canvas, fx.blur_sigma as f32);
    }

    if fx.brightness != 0.0 || fx.contrast != 1.0 {
        let lut: Vec<u8> = (0..256)
            .map(|v| ((v as f64 - 128.0) * fx.contrast + 128.0 + fx.brightness).round().clamp(0.0, 255.0) as u8)
            .collect();
        for c in canvas.iter_mut() {
            *c = lut[*c as usize];
        }
    }

    if fx.noise_std > 0.0 {
        let normal = Normal::new(0.0, fx.noise_std).expect("finite noise level");
        let mut rng = seed::rng(fx.noise_seed);
        for c in canvas.iter_mut() {
            let n: f64 = normal.sample(&mut rng);
            *c = (*c as f64 + n).round().clamp(0.0, 255.0) as u8;
        }
    }

    if let Some(shadow) = &fx.shadow {
        cast_shadow(canvas, shadow);
    }
}

fn cast_shadow(canvas: &mut RgbImage, s: &Shadow) {
    let (cx, cy) = (canvas.width() as f64 / 2.0, canvas.height() as f64 / 2.0);
    let (sin, cos) = s.angle.sin_cos();
    for (x, y, p) in canvas.enumerate_pixels_mut() {
        let d = (x as f64 + 0.5 - cx) * cos + (y as f64 + 0.5 - cy) * sin - s.offset;
        if d <= 0.0 {
            continue;
        }
        let t = (d / s.softness).min(1.0);
        let k = 1.0 - s.strength * t * t * (3.0 - 2.0 * t);
        for c in p.0.iter_mut() {
            *c = (*c as f64 * k).round() as u8;
        }
    }
}

fn annotate(plan: &RenderPlan, hom: &Homography) -> Annotation {
    let (w, h) = (plan.canvas.0 as f64, plan.canvas.1 as f64);
    let mut words = Vec::new();
    for (r, region) in plan.regions.iter().enumerate() {
        for (l, line) in region.lines.iter().enumerate() {
            for word in &line.words {
                let quad = word.bbox.corners().map(|c| {
                    let p = hom.apply(c);
                    [round2(p.x).clamp(0.0, w), round2(p.y).clamp(0.0, h)]
                });
                words.push(AnnotatedWord {
                    text: word.text.clone(),
                    quad,
                    region: r,
                    line: l,
                });
            }
        }
    }
    let text = words.iter().map(|w| w.text.as_str()).collect::<Vec<_>>().join(" ");
    let gt_parse = DocTree::from_pairs([("text_sequence", Value::text(text.clone()))]);
    let target = encode(&gt_parse, &reading_vocab()).expect("reading target encodes");
    Annotation {
        text,
        words,
        gt_parse,
        target,
    }
}
