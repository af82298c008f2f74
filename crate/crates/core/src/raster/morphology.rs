//! Binary erosion, dilation and hole filling.
//!
//! Erosion keeps `z` when every offset of the structuring element translated
//! to `z` lands on foreground. Dilation keeps `z` when the reflected element
//! translated to `z` hits foreground, i.e. `z - b` is foreground for some
//! offset `b`. Both are evaluated with row prefix sums over the horizontal
//! runs of the element, so the cost is proportional to the number of runs
//! rather than the number of offsets.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{BinaryImage, RasterError};

/// A set of integer offsets probing the image; always contains the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuringElement {
    offsets: Vec<(i32, i32)>,
}

impl StructuringElement {
    pub fn new(offsets: Vec<(i32, i32)>) -> Result<Self, RasterError> {
        let unique: BTreeSet<_> = offsets.iter().copied().collect();
        if offsets.is_empty() || unique.len() != offsets.len() || !unique.contains(&(0, 0)) {
            return Err(RasterError::InvalidStructuringElement);
        }
        Ok(Self { offsets })
    }

    /// The single-pixel identity element.
    pub fn point() -> Self {
        Self { offsets: vec![(0, 0)] }
    }

    /// All offsets with `dx^2 + dy^2 <= r^2`.
    pub fn disk(radius: f64) -> Self {
        let r = radius.max(0.0);
        let k = r.floor() as i32;
        let r2 = r * r;
        let mut offsets = Vec::new();
        for dy in -k..=k {
            for dx in -k..=k {
                if (dx * dx + dy * dy) as f64 <= r2 {
                    offsets.push((dx, dy));
                }
            }
        }
        Self { offsets }
    }

    /// `(2k+1) x (2k+1)` square centred on the origin.
    pub fn square(k: u32) -> Self {
        let k = k as i32;
        let offsets = (-k..=k).flat_map(|dy| (-k..=k).map(move |dx| (dx, dy))).collect();
        Self { offsets }
    }

    pub fn offsets(&self) -> &[(i32, i32)] {
        &self.offsets
    }

    pub fn reflect(&self) -> Self {
        Self { offsets: self.offsets.iter().map(|&(dx, dy)| (-dx, -dy)).collect() }
    }

    /// Horizontal runs `(dy, dx_start, dx_end)` (inclusive) covering the offsets.
    fn runs(&self) -> Vec<(i32, i32, i32)> {
        let mut rows: BTreeMap<i32, Vec<i32>> = BTreeMap::new();
        for &(dx, dy) in &self.offsets {
            rows.entry(dy).or_default().push(dx);
        }
        let mut runs = Vec::new();
        for (dy, mut xs) in rows {
            xs.sort_unstable();
            let mut start = xs[0];
            let mut prev = xs[0];
            for &x in &xs[1..] {
                if x != prev + 1 {
                    runs.push((dy, start, prev));
                    start = x;
                }
                prev = x;
            }
            runs.push((dy, start, prev));
        }
        runs
    }
}

/// Per-row prefix counts: `p[y][x]` = foreground pixels in `row y, [0, x)`.
struct RowPrefix {
    width: usize,
    counts: Vec<u32>,
}

impl RowPrefix {
    fn new(img: &BinaryImage) -> Self {
        let w = img.width();
        let mut counts = vec![0u32; (w + 1) * img.height()];
        for y in 0..img.height() {
            let base = y * (w + 1);
            for x in 0..w {
                counts[base + x + 1] = counts[base + x] + img.get(x, y) as u32;
            }
        }
        Self { width: w, counts }
    }

    /// Foreground count in row `y`, columns `[x0, x1]` (inclusive, in bounds).
    fn count(&self, y: usize, x0: usize, x1: usize) -> u32 {
        let base = y * (self.width + 1);
        self.counts[base + x1 + 1] - self.counts[base + x0]
    }
}

/// Erosion with out-of-bounds pixels treated as background.
pub fn erode(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    erode_with_border(img, se, false)
}

/// Dilation with out-of-bounds pixels treated as background.
pub fn dilate(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    dilate_with_border(img, se, false)
}

/// Erosion where pixels outside the image read as `outside`.
pub fn erode_with_border(img: &BinaryImage, se: &StructuringElement, outside: bool) -> BinaryImage {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let prefix = RowPrefix::new(img);
    let runs = se.runs();
    BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        let (x, y) = (x as i64, y as i64);
        runs.iter().all(|&(dy, a, b)| {
            let yy = y + dy as i64;
            let (x0, x1) = (x + a as i64, x + b as i64);
            if yy < 0 || yy >= h {
                return outside;
            }
            let (c0, c1) = (x0.max(0), x1.min(w - 1));
            if c0 > c1 {
                return outside;
            }
            if (c0 != x0 || c1 != x1) && !outside {
                return false;
            }
            let need = (c1 - c0 + 1) as u32;
            prefix.count(yy as usize, c0 as usize, c1 as usize) == need
        })
    })
}

/// Dilation where pixels outside the image read as `outside`.
pub fn dilate_with_border(img: &BinaryImage, se: &StructuringElement, outside: bool) -> BinaryImage {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let prefix = RowPrefix::new(img);
    let runs = se.runs();
    BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        let (x, y) = (x as i64, y as i64);
        runs.iter().any(|&(dy, a, b)| {
            // z - b for b in the run: columns x - b ..= x - a of row y - dy.
            let yy = y - dy as i64;
            let (x0, x1) = (x - b as i64, x - a as i64);
            if yy < 0 || yy >= h {
                return outside;
            }
            let (c0, c1) = (x0.max(0), x1.min(w - 1));
            if (c0 != x0 || c1 != x1) && outside {
                return true;
            }
            c0 <= c1 && prefix.count(yy as usize, c0 as usize, c1 as usize) > 0
        })
    })
}

/// Fill background components (4-connected) that do not reach the border.
pub fn fill_holes(img: &BinaryImage) -> BinaryImage {
    let (w, h) = (img.width(), img.height());
    let mut reached = vec![false; w * h];
    let mut queue = VecDeque::new();
    let seed = |x: usize, y: usize, reached: &mut Vec<bool>, q: &mut VecDeque<(usize, usize)>| {
        let i = y * w + x;
        if !img.get(x, y) && !reached[i] {
            reached[i] = true;
            q.push_back((x, y));
        }
    };
    for x in 0..w {
        seed(x, 0, &mut reached, &mut queue);
        if h > 1 {
            seed(x, h - 1, &mut reached, &mut queue);
        }
    }
    for y in 0..h {
        seed(0, y, &mut reached, &mut queue);
        if w > 1 {
            seed(w - 1, y, &mut reached, &mut queue);
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        let mut visit = |nx: usize, ny: usize| {
            let i = ny * w + nx;
            if !img.get(nx, ny) && !reached[i] {
                reached[i] = true;
                queue.push_back((nx, ny));
            }
        };
        if x > 0 {
            visit(x - 1, y);
        }
        if x + 1 < w {
            visit(x + 1, y);
        }
        if y > 0 {
            visit(x, y - 1);
        }
        if y + 1 < h {
            visit(x, y + 1);
        }
    }
    BinaryImage::from_fn(w, h, |x, y| img.get(x, y) || !reached[y * w + x])
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Literal set definition: z kept iff every z + b lies on foreground.
    fn erode_oracle(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
        BinaryImage::from_fn(img.width(), img.height(), |x, y| {
            se.offsets().iter().all(|&(dx, dy)| img.get_or(x as i64 + dx as i64, y as i64 + dy as i64, false))
        })
    }

    #[test]
    fn point_element_is_identity() {
        let img = BinaryImage::from_ascii(&["#.#", ".##", "#.."]);
        assert_eq!(erode(&img, &StructuringElement::point()), img);
        assert_eq!(dilate(&img, &StructuringElement::point()), img);
    }

    #[test]
    fn blank_stays_blank() {
        let img = BinaryImage::new(6, 5);
        let se = StructuringElement::disk(2.0);
        assert!(erode(&img, &se).is_blank());
        assert!(dilate(&img, &se).is_blank());
    }

    #[test]
    fn square_erodes_to_center() {
        let img = BinaryImage::from_ascii(&[".....", ".###.", ".###.", ".###.", "....."]);
        let out = erode(&img, &StructuringElement::square(1));
        assert_eq!(out, erode_oracle(&img, &StructuringElement::square(1)));
        assert_eq!(out.foreground().collect::<Vec<_>>(), vec![(2, 2)]);
    }

    #[test]
    fn single_pixel_dilates_to_square() {
        let mut img = BinaryImage::new(5, 5);
        img.set(2, 2, true);
        let out = dilate(&img, &StructuringElement::square(1));
        let expected = BinaryImage::from_ascii(&[".....", ".###.", ".###.", ".###.", "....."]);
        assert_eq!(out, expected);
    }

    #[test]
    fn asymmetric_dilation_translates_forward() {
        // Offset (1, 0): every foreground pixel also paints its right neighbour.
        let se = StructuringElement::new(vec![(0, 0), (1, 0)]).unwrap();
        let img = BinaryImage::from_ascii(&[".#..."]);
        assert_eq!(dilate(&img, &se), BinaryImage::from_ascii(&[".##.."]));
        let img = BinaryImage::from_ascii(&[".##.."]);
        assert_eq!(erode(&img, &se), BinaryImage::from_ascii(&[".#..."]));
    }

    #[test]
    fn disk_membership() {
        let d = StructuringElement::disk(1.5);
        assert_eq!(d.offsets().len(), 9);
        let d = StructuringElement::disk(2.0);
        assert_eq!(d.offsets().len(), 13);
        assert!(StructuringElement::new(vec![]).is_err());
        assert!(StructuringElement::new(vec![(1, 0)]).is_err());
        assert!(StructuringElement::new(vec![(0, 0), (0, 0)]).is_err());
    }

    #[test]
    fn border_is_background() {
        let img = BinaryImage::from_fn(4, 4, |_, _| true);
        let out = erode(&img, &StructuringElement::square(1));
        assert_eq!(out.count_foreground(), 4);
        let out = erode_with_border(&img, &StructuringElement::square(1), true);
        assert_eq!(out.count_foreground(), 16);
    }

    #[test]
    fn fill_holes_cases() {
        let solid = BinaryImage::from_ascii(&[".....", ".###.", ".###.", "....."]);
        assert_eq!(fill_holes(&solid), solid);
        assert!(fill_holes(&BinaryImage::new(4, 4)).is_blank());

        let annulus = BinaryImage::from_fn(9, 9, |x, y| {
            (1..=7).contains(&x) && (1..=7).contains(&y) && (x == 1 || x == 7 || y == 1 || y == 7)
        });
        let filled = fill_holes(&annulus);
        let square = BinaryImage::from_fn(9, 9, |x, y| (1..=7).contains(&x) && (1..=7).contains(&y));
        assert_eq!(filled, square);
    }

    #[test]
    fn diagonal_gap_does_not_leak_background() {
        // Background is 4-connected: a hole closed only by a diagonal
        // foreground step still counts as enclosed.
        let img = BinaryImage::from_ascii(&[".....", "..#..", ".#.#.", "..#..", "....."]);
        let filled = fill_holes(&img);
        assert!(filled.get(2, 2));
    }
}
