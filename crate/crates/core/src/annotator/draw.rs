//! Filled raster primitives shared by the overlay and the sketch generator.
//! Pixel `(x, y)` is sampled at its integer coordinates.

use crate::geometry::{point_segment_distance, Point};
use crate::raster::BinaryImage;
use crate::textreader::{render_text, TemplateSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Disk {
        center: Point,
        radius: f64,
    },
    /// All points within `half_width` of the segment.
    Capsule {
        a: Point,
        b: Point,
        half_width: f64,
    },
    Triangle([Point; 3]),
    /// Rectangle centred at `center` with `axis` along its length.
    Band {
        center: Point,
        axis: Point,
        half_length: f64,
        half_width: f64,
    },
}

impl Shape {
    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Shape::Disk { center, radius } => p.distance(center) <= radius,
            Shape::Capsule { a, b, half_width } => point_segment_distance(p, a, b) <= half_width,
            Shape::Triangle([a, b, c]) => {
                let d0 = (b - a).cross(p - a);
                let d1 = (c - b).cross(p - b);
                let d2 = (a - c).cross(p - c);
                let eps = 1e-9;
                (d0 >= -eps && d1 >= -eps && d2 >= -eps) || (d0 <= eps && d1 <= eps && d2 <= eps)
            }
            Shape::Band { center, axis, half_length, half_width } => {
                let d = p - center;
                d.dot(axis).abs() <= half_length && d.dot(axis.perp()).abs() <= half_width
            }
        }
    }

    /// Inclusive integer bounds `(x0, y0, x1, y1)`.
    pub fn bounds(&self) -> (i64, i64, i64, i64) {
        let pts: Vec<(Point, f64)> = match *self {
            Shape::Disk { center, radius } => vec![(center, radius)],
            Shape::Capsule { a, b, half_width } => vec![(a, half_width), (b, half_width)],
            Shape::Triangle(p) => p.iter().map(|&q| (q, 0.0)).collect(),
            Shape::Band { center, axis, half_length, half_width } => {
                let (u, v) = (axis * half_length, axis.perp() * half_width);
                vec![(center + u + v, 0.0), (center + u - v, 0.0), (center - u + v, 0.0), (center - u - v, 0.0)]
            }
        };
        let x0 = pts.iter().map(|(p, r)| p.x - r).fold(f64::INFINITY, f64::min).floor() as i64;
        let y0 = pts.iter().map(|(p, r)| p.y - r).fold(f64::INFINITY, f64::min).floor() as i64;
        let x1 = pts.iter().map(|(p, r)| p.x + r).fold(f64::NEG_INFINITY, f64::max).ceil() as i64;
        let y1 = pts.iter().map(|(p, r)| p.y + r).fold(f64::NEG_INFINITY, f64::max).ceil() as i64;
        (x0, y0, x1, y1)
    }

    /// Every integer pixel inside the shape, unclipped.
    pub fn pixels(&self) -> Vec<(i64, i64)> {
        let (x0, y0, x1, y1) = self.bounds();
        let mut out = Vec::new();
        for y in y0..=y1 {
            for x in x0..=x1 {
                if self.contains(Point::new(x as f64, y as f64)) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    pub fn fill(&self, img: &mut BinaryImage) {
        for (x, y) in self.pixels() {
            img.set_clipped(x, y, true);
        }
    }
}

/// Arrow with its tip at `tip`, pointing along unit `dir` (image frame).
pub fn arrow_shapes(
    tip: Point,
    dir: Point,
    length: f64,
    head_length: f64,
    head_half_width: f64,
    half_stroke: f64,
) -> [Shape; 2] {
    let base = tip - dir * head_length;
    let n = dir.perp() * head_half_width;
    [
        Shape::Capsule { a: tip - dir * length, b: base, half_width: half_stroke },
        Shape::Triangle([tip, base + n, base - n]),
    ]
}

/// Pixels of `text` drawn with the template font, rotated so it reads along
/// `deg` (counter-clockwise, y up) and centred on `center`.
pub fn text_pixels(
    templates: &TemplateSet,
    text: &str,
    center: Point,
    deg: f64,
    scale: usize,
    advance: usize,
    extra: &dyn Fn(char) -> Option<[[bool; 8]; 8]>,
) -> Vec<(i64, i64)> {
    let flat = render_text(templates, text, scale, advance, extra);
    let (fw, fh) = (flat.width() as f64, flat.height() as f64);
    let fc = Point::new(fw / 2.0, fh / 2.0);
    let (s, c) = deg.to_radians().sin_cos();
    let dir = Point::new(c, -s);
    let perp = dir.perp();
    let reach = (fw * fw + fh * fh).sqrt() / 2.0 + 2.0;
    let mut out = Vec::new();
    let (x0, x1) = ((center.x - reach).floor() as i64, (center.x + reach).ceil() as i64);
    let (y0, y1) = ((center.y - reach).floor() as i64, (center.y + reach).ceil() as i64);
    for y in y0..=y1 {
        for x in x0..=x1 {
            let d = Point::new(x as f64 + 0.5, y as f64 + 0.5) - center;
            let p = fc + Point::new(d.dot(dir), d.dot(perp));
            if p.x >= 0.0 && p.y >= 0.0 && flat.get_or(p.x as i64, p.y as i64, false) {
                out.push((x, y));
            }
        }
    }
    out
}

/// The 8x8 plus sign, which the OCR charset lacks.
pub const PLUS_CELL: [[bool; 8]; 8] = {
    let rows: [u8; 8] = [0x00, 0x0C, 0x0C, 0x3F, 0x0C, 0x0C, 0x00, 0x00];
    let mut cell = [[false; 8]; 8];
    let mut y = 0;
    while y < 8 {
        let mut x = 0;
        while x < 8 {
            cell[y][x] = rows[y] & (1 << x) != 0;
            x += 1;
        }
        y += 1;
    }
    cell
};
