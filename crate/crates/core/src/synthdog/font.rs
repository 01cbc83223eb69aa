use std::path::Path;

use ab_glyph::{point, Font, FontArc, GlyphId, PxScale, ScaleFont};

use super::geometry::{Point, Rect};

/// A face the renderer can draw with: an outline font file, or the built-in
/// 8x8 bitmap face covering printable ASCII.
#[derive(Clone)]
pub enum FontFace {
    Outline(FontArc),
    Bitmap,
}

impl std::fmt::Debug for FontFace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FontFace::Outline(_) => f.write_str("FontFace::Outline"),
            FontFace::Bitmap => f.write_str("FontFace::Bitmap"),
        }
    }
}

/// Bitmap rows 0..7 sit above the baseline, row 7 below it.
const BITMAP_ASCENT_ROWS: f64 = 7.0;

impl FontFace {
    pub fn load(path: &Path) -> std::io::Result<Self> {
        let data = std::fs::read(path)?;
        FontArc::try_from_vec(data)
            .map(FontFace::Outline)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    pub fn has_glyph(&self, c: char) -> bool {
        match self {
            FontFace::Outline(f) => f.glyph_id(c) != GlyphId(0),
            FontFace::Bitmap => c.is_ascii_graphic(),
        }
    }

    pub fn missing_glyph(&self, word: &str) -> Option<char> {
        word.chars().find(|&c| !self.has_glyph(c))
    }

    pub fn ascent(&self, size: f64) -> f64 {
        match self {
            FontFace::Outline(f) => f.as_scaled(PxScale::from(size as f32)).ascent() as f64,
            FontFace::Bitmap => size / 8.0 * BITMAP_ASCENT_ROWS,
        }
    }

    pub fn descent(&self, size: f64) -> f64 {
        match self {
            FontFace::Outline(f) => -f.as_scaled(PxScale::from(size as f32)).descent() as f64,
            FontFace::Bitmap => size / 8.0,
        }
    }

    /// Horizontal advance of the whole word including kerning.
    pub fn advance(&self, word: &str, size: f64) -> f64 {
        match self {
            FontFace::Outline(f) => {
                let scaled = f.as_scaled(PxScale::from(size as f32));
                let mut caret = 0.0f32;
                let mut prev = None;
                for c in word.chars() {
                    let id = scaled.glyph_id(c);
                    if let Some(p) = prev {
                        caret += scaled.kern(p, id);
                    }
                    caret += scaled.h_advance(id);
                    prev = Some(id);
                }
                caret as f64
            }
            FontFace::Bitmap => size * word.chars().count() as f64,
        }
    }

    pub fn space_advance(&self, size: f64) -> f64 {
        match self {
            FontFace::Outline(f) => {
                let scaled = f.as_scaled(PxScale::from(size as f32));
                scaled.h_advance(scaled.glyph_id(' ')) as f64
            }
            FontFace::Bitmap => size * 0.5,
        }
    }

    /// Calls `put(x, y, coverage)` for each pixel touched by `word` drawn
    /// with its baseline origin at `origin`. Coverage is in `(0, 1]`.
    pub fn rasterize(&self, word: &str, size: f64, origin: Point, mut put: impl FnMut(i64, i64, f32)) {
        match self {
            FontFace::Outline(f) => {
                let scale = PxScale::from(size as f32);
                let scaled = f.as_scaled(scale);
                let mut caret = origin.x as f32;
                let baseline = origin.y as f32;
                let mut prev = None;
                for c in word.chars() {
                    let id = scaled.glyph_id(c);
                    if let Some(p) = prev {
                        caret += scaled.kern(p, id);
                    }
                    let glyph = id.with_scale_and_position(scale, point(caret, baseline));
                    caret += scaled.h_advance(id);
                    prev = Some(id);
                    if let Some(outlined) = f.outline_glyph(glyph) {
                        let min = outlined.px_bounds().min;
                        let (x0, y0) = (min.x as i64, min.y as i64);
                        outlined.draw(|x, y, cov| {
                            if cov > 0.0 {
                                put(x0 + x as i64, y0 + y as i64, cov.min(1.0));
                            }
                        });
                    }
                }
            }
            FontFace::Bitmap => {
                let dot = size / 8.0;
                let top = origin.y - dot * BITMAP_ASCENT_ROWS;
                for (i, c) in word.chars().enumerate() {
                    let Some(rows) = bitmap_rows(c) else { continue };
                    let left = origin.x + size * i as f64;
                    let x_range = (left.floor() as i64)..((left + size).ceil() as i64);
                    let y_range = (top.floor() as i64)..((top + size).ceil() as i64);
                    for y in y_range {
                        let row = ((y as f64 + 0.5 - top) / dot).floor();
                        if !(0.0..8.0).contains(&row) {
                            continue;
                        }
                        let bits = rows[row as usize];
                        for x in x_range.clone() {
                            let col = ((x as f64 + 0.5 - left) / dot).floor();
                            if (0.0..8.0).contains(&col) && bits & (1 << col as u8) != 0 {
                                put(x, y, 1.0);
                            }
                        }
                    }
                }
            }
        }
    }

    /// Pixel-edge bounding box of the pixels [`FontFace::rasterize`] touches.
    pub fn ink_box(&self, word: &str, size: f64, origin: Point) -> Option<Rect> {
        let mut bounds: Option<(i64, i64, i64, i64)> = None;
        self.rasterize(word, size, origin, |x, y, _| {
            let b = bounds.get_or_insert((x, y, x, y));
            b.0 = b.0.min(x);
            b.1 = b.1.min(y);
            b.2 = b.2.max(x);
            b.3 = b.3.max(y);
        });
        bounds.map(|(l, t, r, b)| Rect::new(l as f64, t as f64, (r + 1) as f64, (b + 1) as f64))
    }
}

fn bitmap_rows(c: char) -> Option<[u8; 8]> {
    let code = c as usize;
    (c.is_ascii_graphic()).then(|| font8x8::legacy::BASIC_LEGACY[code])
}
