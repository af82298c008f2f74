//! Oriented text recognition for the small components stripped from the
//! sketch: word grouping by dilation, slope estimation, de-rotation and
//! correlation against a fixed glyph set, then snapping words to arrows and
//! members.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{BBox, Point};
use crate::raster::{connected_components, dilate, BinaryImage, Connectivity, Region, StructuringElement};
use crate::segmenter::{ArrowSeg, Joint, MemberSeg};

/// Characters covered by the built-in templates.
pub const CHARSET: &str = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz.-/";
/// Side of a template cell in pixels.
pub const GLYPH_SIZE: usize = 24;
const MAGIC: &str = "TRSK1";
const BUILTIN: &[u8] = include_bytes!("../assets/glyphs.trsk");
/// Template cells are the 8x8 source font scaled by this factor.
const FONT_SCALE: usize = 3;

/// Vertical font-row bands a word can span: caps/digits, caps with
/// descenders, x-height, x-height with descenders.
const BANDS: [(usize, usize); 4] = [(0, 6), (0, 7), (2, 6), (2, 7)];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextError {
    #[error("invalid template file: {0}")]
    BadTemplates(String),
    #[error("slope underdetermined")]
    SlopeUnderdetermined,
    #[error("empty word")]
    EmptyWord,
}

/// Glyph bitmaps used for correlation OCR.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateSet {
    charset: String,
    glyphs: Vec<BinaryImage>,
    /// Zero-mean unit-norm normalized templates, one vector per band and char.
    prepared: Vec<Vec<Vec<f64>>>,
}

impl TemplateSet {
    /// The templates shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("shipped template file is valid")
    }

    /// Parse a TRSK1 file: `TRSK1 <charset>\n` then, per character, 24 rows of
    /// 3 bytes with the most significant bit leftmost.
    pub fn parse(bytes: &[u8]) -> Result<Self, TextError> {
        let bad = |m: &str| TextError::BadTemplates(m.to_string());
        let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| bad("missing header line"))?;
        let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| bad("header is not UTF-8"))?;
        let charset =
            header.strip_prefix(MAGIC).and_then(|r| r.strip_prefix(' ')).ok_or_else(|| bad("missing TRSK1 magic"))?;
        let n = charset.chars().count();
        let row_bytes = GLYPH_SIZE / 8;
        let body = &bytes[nl + 1..];
        if n == 0 || body.len() != n * GLYPH_SIZE * row_bytes {
            return Err(bad("body length does not match charset"));
        }
        let mut glyphs = Vec::with_capacity(n);
        for (i, c) in charset.chars().enumerate() {
            let cell = &body[i * GLYPH_SIZE * row_bytes..(i + 1) * GLYPH_SIZE * row_bytes];
            let g = BinaryImage::from_fn(GLYPH_SIZE, GLYPH_SIZE, |x, y| {
                cell[y * row_bytes + x / 8] & (0x80 >> (x % 8)) != 0
            });
            if g.is_blank() {
                return Err(TextError::BadTemplates(format!("glyph {c:?} is blank")));
            }
            glyphs.push(g);
        }
        let prepared = BANDS
            .iter()
            .map(|&(r0, r1)| {
                glyphs
                    .iter()
                    .map(|g| {
                        let (x0, x1) = ink_columns(g).expect("non-blank");
                        let rows = (r0 * FONT_SCALE, (r1 + 1) * FONT_SCALE - 1);
                        normalize_cell(g, (x0, x1), rows)
                    })
                    .collect()
            })
            .collect();
        Ok(Self { charset: charset.to_string(), glyphs, prepared })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("{MAGIC} {}\n", self.charset).into_bytes();
        for g in &self.glyphs {
            for y in 0..GLYPH_SIZE {
                for byte in 0..GLYPH_SIZE / 8 {
                    let mut b = 0u8;
                    for bit in 0..8 {
                        if g.get(byte * 8 + bit, y) {
                            b |= 0x80 >> bit;
                        }
                    }
                    out.push(b);
                }
            }
        }
        out
    }

    pub fn charset(&self) -> &str {
        &self.charset
    }

    pub fn glyph(&self, c: char) -> Option<&BinaryImage> {
        self.charset.chars().position(|k| k == c).map(|i| &self.glyphs[i])
    }

    /// The 8x8 source cell of `c` (row-major), recovered from the template.
    pub fn font_cell(&self, c: char) -> Option<[[bool; 8]; 8]> {
        let g = self.glyph(c)?;
        let mut cell = [[false; 8]; 8];
        for (y, row) in cell.iter_mut().enumerate() {
            for (x, v) in row.iter_mut().enumerate() {
                *v = g.get(x * FONT_SCALE + 1, y * FONT_SCALE + 1);
            }
        }
        Some(cell)
    }
}

fn ink_columns(img: &BinaryImage) -> Option<(usize, usize)> {
    let cols: Vec<usize> = (0..img.width()).filter(|&x| (0..img.height()).any(|y| img.get(x, y))).collect();
    Some((*cols.first()?, *cols.last()?))
}

/// Scale the box `cols x rows` of `img` into a normalized 24x24 cell.
fn normalize_cell(img: &BinaryImage, cols: (usize, usize), rows: (usize, usize)) -> Vec<f64> {
    let w = (cols.1 - cols.0 + 1) as f64;
    let h = (rows.1 - rows.0 + 1) as f64;
    normalize_box(w, h, |sx, sy| {
        img.get_or(cols.0 as i64 + sx.floor() as i64, rows.0 as i64 + sy.floor() as i64, false)
    })
}

/// Sample the continuous box `[0, w) x [0, h)` through `ink` into a 24x24
/// cell, aspect preserved and centred, with 4x4 supersampling and a 3x3 box
/// blur. The result is zero-mean and unit-norm, so a dot product of two
/// cells is their Pearson correlation.
fn normalize_box(w: f64, h: f64, ink: impl Fn(f64, f64) -> bool) -> Vec<f64> {
    const SS: usize = 4;
    let n = GLYPH_SIZE as f64;
    let s = n / w.max(h);
    let (ox, oy) = ((n - w * s) / 2.0, (n - h * s) / 2.0);
    let mut cov = vec![0.0; GLYPH_SIZE * GLYPH_SIZE];
    for (i, out) in cov.iter_mut().enumerate() {
        let (u, t) = ((i % GLYPH_SIZE) as f64, (i / GLYPH_SIZE) as f64);
        let mut hits = 0;
        for a in 0..SS {
            for b in 0..SS {
                let sx = (u + (a as f64 + 0.5) / SS as f64 - ox) / s;
                let sy = (t + (b as f64 + 0.5) / SS as f64 - oy) / s;
                if sx >= 0.0 && sy >= 0.0 && sx < w && sy < h && ink(sx, sy) {
                    hits += 1;
                }
            }
        }
        *out = hits as f64 / (SS * SS) as f64;
    }
    let g = GLYPH_SIZE as i64;
    let mut v: Vec<f64> = (0..GLYPH_SIZE * GLYPH_SIZE)
        .map(|i| {
            let (x, y) = ((i % GLYPH_SIZE) as i64, (i / GLYPH_SIZE) as i64);
            let mut sum = 0.0;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (xx, yy) = (x + dx, y + dy);
                    if xx >= 0 && yy >= 0 && xx < g && yy < g {
                        sum += cov[(yy * g + xx) as usize];
                    }
                }
            }
            sum
        })
        .collect();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

/// One group of character components read as a single string.
#[derive(Debug, Clone, PartialEq)]
pub struct WordRegion {
    pub char_regions: Vec<Region>,
    pub group_bbox: BBox,
    pub slope_deg: Option<f64>,
    pub text: Option<String>,
    pub char_scores: Option<Vec<f64>>,
}

impl WordRegion {
    pub fn from_regions(char_regions: Vec<Region>) -> Result<Self, TextError> {
        let group_bbox =
            char_regions.iter().map(|r| r.bbox()).reduce(|a, b| a.union(&b)).ok_or(TextError::EmptyWord)?;
        Ok(Self { char_regions, group_bbox, slope_deg: None, text: None, char_scores: None })
    }

    pub fn center(&self) -> Point {
        self.group_bbox.center()
    }

    pub fn mean_score(&self) -> Option<f64> {
        let s = self.char_scores.as_ref()?;
        (!s.is_empty()).then(|| s.iter().sum::<f64>() / s.len() as f64)
    }
}

/// Group character components into words by dilating with a disk.
pub fn group_words(chars: &BinaryImage, dilation_radius: f64) -> Vec<WordRegion> {
    let grown = dilate(chars, &StructuringElement::disk(dilation_radius));
    let (labels, n) = crate::raster::label_image(&grown, Connectivity::Eight);
    let mut groups: Vec<Vec<Region>> = vec![Vec::new(); n];
    for region in connected_components(chars, Connectivity::Eight) {
        let (x, y) = region.pixels[0];
        let l = labels[y * chars.width() + x] as usize;
        groups[l - 1].push(region);
    }
    groups
        .into_iter()
        .filter(|g| !g.is_empty())
        .map(|g| WordRegion::from_regions(g).expect("non-empty group"))
        .collect()
}

/// Character regions whose bounding-box area lies within `band` times the
/// mean. Boxes are taken in the frame of the word's principal axis, so that
/// rotation does not inflate them unevenly; for level text this is the
/// ordinary axis-aligned box. The mean is recomputed over the in-band set
/// until the set is stable, so a few tiny marks do not drag it down.
pub fn slope_candidates(word: &WordRegion, band: (f64, f64)) -> Vec<&Region> {
    let pixels: Vec<Point> =
        word.char_regions.iter().flat_map(|r| r.pixels.iter().map(|&(x, y)| Point::new(x as f64, y as f64))).collect();
    let dir = principal_direction(&pixels).unwrap_or(Point::new(1.0, 0.0));
    let perp = dir.perp();
    let areas: Vec<f64> = word
        .char_regions
        .iter()
        .map(|r| {
            let (mut u0, mut u1, mut v0, mut v1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
            for &(x, y) in &r.pixels {
                let p = Point::new(x as f64, y as f64);
                let (u, v) = (p.dot(dir), p.dot(perp));
                u0 = u0.min(u);
                u1 = u1.max(u);
                v0 = v0.min(v);
                v1 = v1.max(v);
            }
            (u1 - u0 + 1.0) * (v1 - v0 + 1.0)
        })
        .collect();
    let mut inside: Vec<bool> = vec![true; areas.len()];
    for _ in 0..areas.len().max(1) {
        let kept: Vec<f64> = areas.iter().zip(&inside).filter(|(_, &k)| k).map(|(&a, _)| a).collect();
        if kept.is_empty() {
            break;
        }
        let mean = kept.iter().sum::<f64>() / kept.len() as f64;
        let next: Vec<bool> = areas.iter().map(|&a| a >= band.0 * mean && a <= band.1 * mean).collect();
        if next == inside {
            break;
        }
        inside = next;
    }
    word.char_regions.iter().zip(&inside).filter(|(_, &k)| k).map(|(r, _)| r).collect()
}

pub fn estimate_text_slope(word: &WordRegion) -> Result<f64, TextError> {
    estimate_text_slope_with(word, (0.5, 1.4))
}

/// Text slope in degrees, `(-90, 90]`, math convention (y up): the mean
/// direction of the segments joining consecutive valid character bbox
/// centres, ordered along their principal direction.
pub fn estimate_text_slope_with(word: &WordRegion, area_band: (f64, f64)) -> Result<f64, TextError> {
    let valid = slope_candidates(word, area_band);
    if valid.len() < 3 {
        return Err(TextError::SlopeUnderdetermined);
    }
    let centers: Vec<Point> = valid.iter().map(|r| r.bbox_center()).collect();
    let dir = principal_direction(&centers).ok_or(TextError::SlopeUnderdetermined)?;
    let mut order: Vec<(f64, Point)> = centers.iter().map(|&c| (c.dot(dir), c)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut sum = Point::default();
    for pair in order.windows(2) {
        if let Some(u) = (pair[1].1 - pair[0].1).normalized() {
            sum = sum + u;
        }
    }
    if sum.norm() == 0.0 {
        return Err(TextError::SlopeUnderdetermined);
    }
    let mut deg = (-sum.y).atan2(sum.x).to_degrees();
    if deg <= -90.0 {
        deg += 180.0;
    } else if deg > 90.0 {
        deg -= 180.0;
    }
    Ok(deg)
}

fn principal_direction(points: &[Point]) -> Option<Point> {
    let n = points.len() as f64;
    let m = points.iter().fold(Point::default(), |a, &p| a + p) * (1.0 / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let d = *p - m;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    if sxx + syy == 0.0 {
        return None;
    }
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    Some(Point::from_angle(theta))
}

/// Result of reading one word.
#[derive(Debug, Clone, PartialEq)]
pub struct WordReading {
    pub text: String,
    pub char_scores: Vec<f64>,
    /// Reading direction used, degrees math convention.
    pub orientation_deg: f64,
}

impl WordReading {
    pub fn mean_score(&self) -> f64 {
        if self.char_scores.is_empty() {
            0.0
        } else {
            self.char_scores.iter().sum::<f64>() / self.char_scores.len() as f64
        }
    }
}

pub fn recognize_word(word: &WordRegion, templates: &TemplateSet) -> Result<WordReading, TextError> {
    recognize_word_with(word, templates, (0.5, 1.4))
}

/// Read a word along its estimated slope and the opposite direction, keeping
/// the reading with the higher mean score. Without a usable slope the four
/// axis directions are tried.
pub fn recognize_word_with(
    word: &WordRegion,
    templates: &TemplateSet,
    area_band: (f64, f64),
) -> Result<WordReading, TextError> {
    if word.char_regions.is_empty() {
        return Err(TextError::EmptyWord);
    }
    let angles: Vec<f64> = match estimate_text_slope_with(word, area_band) {
        Ok(s) => vec![s, s + 180.0],
        Err(_) => vec![0.0, 90.0, 180.0, 270.0],
    };
    let mut best: Option<WordReading> = None;
    for a in angles {
        let r = read_at(word, templates, refine_angle(word, a));
        if best.as_ref().is_none_or(|b| r.mean_score() > b.mean_score()) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one angle"))
}

/// Recognize a word, then store slope, text and scores on it and reorder its
/// characters along the reading direction.
pub fn read_word(
    word: &mut WordRegion,
    templates: &TemplateSet,
    area_band: (f64, f64),
) -> Result<WordReading, TextError> {
    let reading = recognize_word_with(word, templates, area_band)?;
    word.slope_deg = estimate_text_slope_with(word, area_band).ok();
    let dir = reading_direction(reading.orientation_deg);
    word.char_regions.sort_by(|a, b| a.centroid().dot(dir).total_cmp(&b.centroid().dot(dir)));
    word.text = Some(reading.text.clone());
    word.char_scores = Some(reading.char_scores.clone());
    Ok(reading)
}

/// Unit reading direction in image coordinates (y down).
fn reading_direction(deg: f64) -> Point {
    let r = deg.to_radians();
    Point::new(r.cos(), -r.sin())
}

/// Adjust a reading angle within +-6 degrees so that the word's extent
/// across the reading direction is smallest; the text band of a straight
/// line of characters is tightest when the baseline is level.
fn refine_angle(word: &WordRegion, angle_deg: f64) -> f64 {
    let pixels: Vec<Point> =
        word.char_regions.iter().flat_map(|r| r.pixels.iter().map(|&(x, y)| Point::new(x as f64, y as f64))).collect();
    let extent = |deg: f64| {
        let d = reading_direction(deg);
        let perp = Point::new(-d.y, d.x);
        let (lo, hi) = pixels.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| {
            let v = p.dot(perp);
            (lo.min(v), hi.max(v))
        });
        hi - lo
    };
    let mut best = (extent(angle_deg), 0i32);
    for k in -24i32..=24 {
        let e = extent(angle_deg + 0.25 * k as f64);
        if e < best.0 - 1e-9 || ((e - best.0).abs() <= 1e-9 && k.abs() < best.1.abs()) {
            best = (e, k);
        }
    }
    angle_deg + 0.25 * best.1 as f64
}

/// Character spans along the reading direction: `(u_min, u_max)` per
/// character after merging components whose spans overlap by at least half of
/// the narrower one (the dots of i and j).
fn character_spans(word: &WordRegion, dir: Point) -> Vec<(f64, f64)> {
    let mut spans: Vec<(f64, f64)> = word
        .char_regions
        .iter()
        .map(|r| {
            r.pixels.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &(x, y)| {
                let u = Point::new(x as f64, y as f64).dot(dir);
                (lo.min(u - 0.5), hi.max(u + 0.5))
            })
        })
        .collect();
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (a, b) in spans {
        if let Some(last) = merged.last_mut() {
            let overlap = (last.1.min(b) - last.0.max(a)).max(0.0);
            let narrower = (last.1 - last.0).min(b - a);
            if overlap >= 0.5 * narrower {
                *last = (last.0.min(a), last.1.max(b));
                continue;
            }
        }
        merged.push((a, b));
    }
    merged
}

fn read_at(word: &WordRegion, templates: &TemplateSet, angle_deg: f64) -> WordReading {
    let orientation_deg = crate::geometry::wrap_deg_360(angle_deg);
    let dir = reading_direction(angle_deg);
    let perp = Point::new(-dir.y, dir.x);
    let b = word.group_bbox;
    let mut local = BinaryImage::new(b.width(), b.height());
    let (mut v0, mut v1) = (f64::MAX, f64::MIN);
    for r in &word.char_regions {
        for &(x, y) in &r.pixels {
            local.set(x - b.min_x, y - b.min_y, true);
            let v = Point::new(x as f64, y as f64).dot(perp);
            v0 = v0.min(v - 0.5);
            v1 = v1.max(v + 0.5);
        }
    }
    let ink =
        |p: Point| local.get_or((p.x - b.min_x as f64).round() as i64, (p.y - b.min_y as f64).round() as i64, false);
    let cells: Vec<Vec<f64>> = character_spans(word, dir)
        .into_iter()
        .map(|(u0, u1)| normalize_box(u1 - u0, v1 - v0, |su, sv| ink(dir * (u0 + su) + perp * (v0 + sv))))
        .collect();
    let chars: Vec<char> = templates.charset.chars().collect();

    let mut best: Option<WordReading> = None;
    for band in &templates.prepared {
        let mut text = String::new();
        let mut scores = Vec::new();
        for cell in &cells {
            let (mut bi, mut bs) = (0usize, f64::NEG_INFINITY);
            for (i, t) in band.iter().enumerate() {
                let r: f64 = cell.iter().zip(t).map(|(a, b)| a * b).sum();
                if r > bs {
                    bs = r;
                    bi = i;
                }
            }
            text.push(chars[bi]);
            scores.push(((1.0 + bs) / 2.0).clamp(0.0, 1.0));
        }
        let r = WordReading { text, char_scores: scores, orientation_deg };
        if best.as_ref().is_none_or(|b| r.mean_score() > b.mean_score()) {
            best = Some(r);
        }
    }
    best.expect("four bands")
}

/// What a label was attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "id")]
pub enum Attachment {
    Arrow(usize),
    Member(usize),
    Unassigned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ForceUnit {
    #[serde(rename = "kN")]
    KiloNewton,
    #[serde(rename = "N")]
    Newton,
}

/// Parsed content of a label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelValue {
    /// A load magnitude in kN; `reversed` when the number was negative.
    Load {
        magnitude_kn: f64,
        unit: ForceUnit,
        reversed: bool,
    },
    Name(String),
    Unparseable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecognizedLabel {
    pub text: String,
    pub anchor: Point,
    pub attached_to: Attachment,
    pub parsed: LabelValue,
}

/// Parse `NUMBER UNIT?` where NUMBER is `-?digits(.digits)?` and UNIT is
/// `kN` or `N` (kN when absent). Returns the magnitude in kN and whether the
/// sign was negative.
pub fn parse_load_label(text: &str) -> Option<(f64, ForceUnit, bool)> {
    let (neg, rest) = match text.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, text),
    };
    let int_len = rest.bytes().take_while(u8::is_ascii_digit).count();
    if int_len == 0 {
        return None;
    }
    let mut num_len = int_len;
    if rest[int_len..].starts_with('.') {
        let frac = rest[int_len + 1..].bytes().take_while(u8::is_ascii_digit).count();
        if frac == 0 {
            return None;
        }
        num_len += 1 + frac;
    }
    let value: f64 = rest[..num_len].parse().ok()?;
    let (unit, factor) = match &rest[num_len..] {
        "" | "kN" => (ForceUnit::KiloNewton, 1.0),
        "N" => (ForceUnit::Newton, 1e-3),
        _ => return None,
    };
    Some((value * factor, unit, neg))
}

/// Attach each recognized word to the nearest arrow (bbox centre) or member
/// (midpoint). Arrows win ties, then lower ids.
pub fn snap_labels(
    words: &[WordRegion],
    arrows: &[ArrowSeg],
    members: &[MemberSeg],
    joints: &[Joint],
) -> Vec<RecognizedLabel> {
    let center_of = |id: usize| joints.iter().find(|j| j.id == id).map(|j| j.center);
    let mut targets: Vec<(Attachment, Point)> = Vec::new();
    let mut sorted_arrows: Vec<&ArrowSeg> = arrows.iter().collect();
    sorted_arrows.sort_by_key(|a| a.id);
    for a in sorted_arrows {
        targets.push((Attachment::Arrow(a.id), a.region.bbox_center()));
    }
    let mut sorted_members: Vec<&MemberSeg> = members.iter().collect();
    sorted_members.sort_by_key(|m| m.id);
    for m in sorted_members {
        if let (Some(a), Some(b)) = (center_of(m.joint_a), center_of(m.joint_b)) {
            targets.push((Attachment::Member(m.id), (a + b) * 0.5));
        }
    }

    words
        .iter()
        .map(|w| {
            let anchor = w.center();
            let text = w.text.clone().unwrap_or_default();
            let mut best: Option<(Attachment, f64)> = None;
            for &(t, p) in &targets {
                let d = p.distance(anchor);
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((t, d));
                }
            }
            let attached_to = best.map_or(Attachment::Unassigned, |(t, _)| t);
            let parsed = match attached_to {
                Attachment::Arrow(_) => match parse_load_label(&text) {
                    Some((magnitude_kn, unit, reversed)) => LabelValue::Load { magnitude_kn, unit, reversed },
                    None => LabelValue::Unparseable,
                },
                Attachment::Member(_) => LabelValue::Name(text.clone()),
                Attachment::Unassigned => LabelValue::Unparseable,
            };
            RecognizedLabel { text, anchor, attached_to, parsed }
        })
        .collect()
}

/// Draw `text` with the template font at an integer `scale` (font pixels
/// per 8x8 cell pixel), advancing `advance` pixels per character. Characters
/// outside the charset render as blanks unless `extra` supplies them.
pub fn render_text(
    templates: &TemplateSet,
    text: &str,
    scale: usize,
    advance: usize,
    extra: &dyn Fn(char) -> Option<[[bool; 8]; 8]>,
) -> BinaryImage {
    let n = text.chars().count();
    let width = if n == 0 { 1 } else { (n - 1) * advance + 8 * scale };
    let mut img = BinaryImage::new(width, 8 * scale);
    for (k, ch) in text.chars().enumerate() {
        let Some(cell) = templates.font_cell(ch).or_else(|| extra(ch)) else {
            continue;
        };
        for (y, row) in cell.iter().enumerate() {
            for (x, &on) in row.iter().enumerate() {
                if !on {
                    continue;
                }
                for dy in 0..scale {
                    for dx in 0..scale {
                        img.set(k * advance + x * scale + dx, y * scale + dy, true);
                    }
                }
            }
        }
    }
    img
}
