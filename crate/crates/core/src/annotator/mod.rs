//! Result overlays, result export and synthetic sketch generation.

pub mod draw;
pub mod sketch;

pub use sketch::{generate_sketch, hazard_map, load_label, random_truss, SketchError, SketchParams};

use crate::geometry::Point;
use crate::raster::{BinaryImage, GrayImage, RgbImage};
use crate::segmenter::SupportKind;
use crate::solver::SolveResult;
use crate::textreader::TemplateSet;
use crate::trussmodel::{to_json, TrussModel};
use draw::{arrow_shapes, text_pixels, Shape, PLUS_CELL};

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct OverlayStyle {
    pub joint: Rgb,
    pub member: Rgb,
    pub arrow: Rgb,
    pub support: Rgb,
    pub tension: Rgb,
    pub compression: Rgb,
    /// Label cell height in pixels; a multiple of 8 renders crisply.
    pub font_px: usize,
    /// Digits after the decimal point in force labels.
    pub decimals: usize,
}

impl Default for OverlayStyle {
    fn default() -> Self {
        Self {
            joint: [255, 0, 0],
            member: [190, 0, 0],
            arrow: [255, 215, 0],
            support: [0, 170, 0],
            tension: [0, 90, 255],
            compression: [200, 0, 200],
            font_px: 16,
            decimals: 2,
        }
    }
}

impl OverlayStyle {
    /// True when every role has its own colour and the font is legible.
    pub fn is_valid(&self) -> bool {
        let c = [self.joint, self.member, self.arrow, self.support, self.tension, self.compression];
        let distinct = (0..c.len()).all(|i| (i + 1..c.len()).all(|j| c[i] != c[j]));
        distinct && self.font_px >= 8
    }

    /// `+5.00 kN` for tension, `-7.07 kN` for compression.
    pub fn force_label(&self, n: f64) -> String {
        let sign = match self.force_sign(n) {
            1 => "+",
            -1 => "-",
            _ => "",
        };
        format!("{sign}{:.*} kN", self.decimals, n.abs())
    }

    /// Sign of `n` as printed: forces that round to zero count as zero.
    pub fn force_sign(&self, n: f64) -> i8 {
        let text = format!("{:.*}", self.decimals, n.abs());
        if text.chars().all(|c| c == '0' || c == '.') {
            0
        } else if n > 0.0 {
            1
        } else {
            -1
        }
    }

    fn force_color(&self, n: f64) -> Rgb {
        match self.force_sign(n) {
            1 => self.tension,
            -1 => self.compression,
            _ => self.member,
        }
    }
}

fn plus_glyph(c: char) -> Option<[[bool; 8]; 8]> {
    (c == '+').then_some(PLUS_CELL)
}

fn paint(out: &mut RgbImage, pixels: impl IntoIterator<Item = (i64, i64)>, color: Rgb) {
    for (x, y) in pixels {
        out.set_clipped(x, y, color);
    }
}

/// Draw the parsed model over the input: joints, members, supports and load
/// arrows in the style palette and, when a result is given, member tint by
/// sign with the axial force printed beside each member.
pub fn render_overlay(
    input: &GrayImage,
    model: &TrussModel,
    result: Option<&SolveResult>,
    style: &OverlayStyle,
) -> RgbImage {
    let mut out = RgbImage::from_gray(input);
    let (w, h) = (input.width() as i64, input.height() as i64);
    let pos = |id: usize| model.node(id).map(|n| n.pos_px);

    for m in &model.members {
        let (Some(a), Some(b)) = (pos(m.node_a), pos(m.node_b)) else { continue };
        let color = result.and_then(|r| r.axial_kn.get(&m.id)).map_or(style.member, |&n| style.force_color(n));
        paint(&mut out, Shape::Capsule { a, b, half_width: 1.5 }.pixels(), color);
    }
    for s in &model.supports {
        let Some(c) = pos(s.node) else { continue };
        let (apex, base) = (c + Point::new(0.0, 6.0), c + Point::new(0.0, 24.0));
        let tri = Shape::Triangle([apex, base + Point::new(-9.0, 0.0), base + Point::new(9.0, 0.0)]);
        paint(&mut out, tri.pixels(), style.support);
        if s.kind == SupportKind::Roller {
            let (sn, cs) = s.roll_angle_deg.unwrap_or(0.0).to_radians().sin_cos();
            let band = Shape::Band {
                center: base + Point::new(0.0, 5.0),
                axis: Point::new(cs, -sn),
                half_length: 14.0,
                half_width: 1.5,
            };
            paint(&mut out, band.pixels(), style.support);
        }
    }
    for l in &model.loads {
        let Some(c) = pos(l.node) else { continue };
        let (sn, cs) = l.direction_deg.to_radians().sin_cos();
        let dir = Point::new(cs, -sn);
        for s in arrow_shapes(c - dir * 14.0, dir, 60.0, 12.0, 6.0, 1.5) {
            paint(&mut out, s.pixels(), style.arrow);
        }
    }
    for n in &model.nodes {
        paint(&mut out, Shape::Disk { center: n.pos_px, radius: 6.0 }.pixels(), style.joint);
    }

    let Some(result) = result else { return out };
    let templates = TemplateSet::builtin();
    let scale = (style.font_px / 8).max(1);
    let advance = 8 * scale + scale;
    let mut placed: Vec<(i64, i64, i64, i64)> = Vec::new();
    for m in &model.members {
        let (Some(a), Some(b), Some(&n)) = (pos(m.node_a), pos(m.node_b), result.axial_kn.get(&m.id)) else { continue };
        let Some(along) = (b - a).normalized() else { continue };
        let text = style.force_label(n);
        let color = style.force_color(n);
        let mid = (a + b) * 0.5;
        let normal = along.perp();
        let base_offset = 1.2 * style.font_px as f64;
        let mut chosen = None;
        // Double the offset on collision, trying both sides each time;
        // after the last attempt the first placement is drawn regardless.
        'attempts: for attempt in 0..4 {
            let offset = base_offset * f64::from(1u32 << attempt);
            for side in [1.0, -1.0] {
                let px =
                    text_pixels(&templates, &text, mid + normal * (side * offset), 0.0, scale, advance, &plus_glyph);
                let px = clamp_inside(px, w, h);
                let bb = bounds(&px);
                let pad = (style.font_px / 2) as i64;
                let bb = (bb.0 - pad, bb.1 - pad, bb.2 + pad, bb.3 + pad);
                if !placed.iter().any(|q| overlaps(q, &bb)) {
                    chosen = Some((px, bb));
                    break 'attempts;
                }
                if chosen.is_none() {
                    chosen = Some((px, bb));
                }
            }
        }
        if let Some((px, bb)) = chosen {
            placed.push(bb);
            paint(&mut out, px, color);
        }
    }
    out
}

fn bounds(px: &[(i64, i64)]) -> (i64, i64, i64, i64) {
    px.iter()
        .fold((i64::MAX, i64::MAX, i64::MIN, i64::MIN), |b, &(x, y)| (b.0.min(x), b.1.min(y), b.2.max(x), b.3.max(y)))
}

fn overlaps(a: &(i64, i64, i64, i64), b: &(i64, i64, i64, i64)) -> bool {
    a.0 <= b.2 && b.0 <= a.2 && a.1 <= b.3 && b.1 <= a.3
}

/// Shift a pixel set so its bounding box lies inside a `w x h` image.
fn clamp_inside(px: Vec<(i64, i64)>, w: i64, h: i64) -> Vec<(i64, i64)> {
    if px.is_empty() {
        return px;
    }
    let (x0, y0, x1, y1) = bounds(&px);
    let shift = |lo: i64, hi: i64, size: i64| {
        if hi - lo + 1 > size || lo < 0 {
            -lo
        } else if hi >= size {
            size - 1 - hi
        } else {
            0
        }
    };
    let (dx, dy) = (shift(x0, x1, w), shift(y0, y1, h));
    px.into_iter().map(|(x, y)| (x + dx, y + dy)).collect()
}

/// The model document with results embedded.
pub fn export_results(model: &TrussModel, result: &SolveResult) -> String {
    to_json(model, Some(result))
}

/// Mask of pixels painted exactly `color`.
pub fn color_mask(img: &RgbImage, color: Rgb) -> BinaryImage {
    BinaryImage::from_fn(img.width(), img.height(), |x, y| img.get(x, y) == color)
}
