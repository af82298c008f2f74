//! Connected-component labeling and region shape descriptors.

use super::{BinaryImage, RasterError};
use crate::geometry::{BBox, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

/// Shape descriptors of a pixel set.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMetrics {
    pub area: usize,
    pub bbox: BBox,
    pub bbox_center: Point,
    pub centroid: Point,
    /// `(LBx, LBy)`: bounding box side lengths in pixels.
    pub bbox_extent: (f64, f64),
    /// Second central moments `(mu20, mu11, mu02)` normalized by area.
    pub moments: (f64, f64, f64),
    /// Eccentricity of the ellipse with the same second moments, in `[0, 1]`.
    pub line_similarity: f64,
    /// Centroid to bbox-center distance over the bbox diagonal, in `[0, 1)`.
    pub centroid_shift: f64,
}

impl RegionMetrics {
    /// Area over bounding-box area.
    pub fn fill_ratio(&self) -> f64 {
        self.area as f64 / self.bbox.area() as f64
    }

    /// Major/minor eigenvalues of the covariance.
    pub fn principal_variances(&self) -> (f64, f64) {
        let (a, b, c) = self.moments;
        let mean = (a + c) / 2.0;
        let d = (((a - c) / 2.0).powi(2) + b * b).sqrt();
        (mean + d, (mean - d).max(0.0))
    }

    /// Unit vector of the major axis in image coordinates, `None` when the
    /// second moments are isotropic (axis undefined).
    pub fn major_axis(&self) -> Option<Point> {
        let (a, b, c) = self.moments;
        let (l1, l2) = self.principal_variances();
        if l1 <= 0.0 || (l1 - l2) <= 1e-9 * l1 {
            return None;
        }
        let theta = 0.5 * (2.0 * b).atan2(a - c);
        Some(Point::from_angle(theta))
    }
}

/// One connected foreground component.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    /// Label, dense from 1 in raster order of each component's first pixel.
    pub id: usize,
    /// Member pixels in raster order.
    pub pixels: Vec<(usize, usize)>,
    pub metrics: RegionMetrics,
}

impl Region {
    pub fn from_pixels(id: usize, mut pixels: Vec<(usize, usize)>) -> Result<Self, RasterError> {
        pixels.sort_unstable_by_key(|&(x, y)| (y, x));
        let metrics = region_metrics(&pixels)?;
        Ok(Self { id, pixels, metrics })
    }

    pub fn area(&self) -> usize {
        self.metrics.area
    }

    pub fn bbox(&self) -> BBox {
        self.metrics.bbox
    }

    pub fn centroid(&self) -> Point {
        self.metrics.centroid
    }

    pub fn bbox_center(&self) -> Point {
        self.metrics.bbox_center
    }

    pub fn line_similarity(&self) -> f64 {
        self.metrics.line_similarity
    }

    pub fn centroid_shift(&self) -> f64 {
        self.metrics.centroid_shift
    }

    /// Render the region alone on a blank canvas of the given size.
    pub fn to_mask(&self, width: usize, height: usize) -> BinaryImage {
        BinaryImage::from_pixels(width, height, &self.pixels)
    }
}

/// Compute the shape descriptors of a non-empty pixel set.
pub fn region_metrics(pixels: &[(usize, usize)]) -> Result<RegionMetrics, RasterError> {
    let bbox = BBox::of_pixels(pixels).ok_or(RasterError::EmptyRegion)?;
    let n = pixels.len() as f64;
    let (sx, sy) = pixels.iter().fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x as f64, sy + y as f64));
    let centroid = Point::new(sx / n, sy / n);
    let (mut m20, mut m11, mut m02) = (0.0, 0.0, 0.0);
    for &(x, y) in pixels {
        let dx = x as f64 - centroid.x;
        let dy = y as f64 - centroid.y;
        m20 += dx * dx;
        m11 += dx * dy;
        m02 += dy * dy;
    }
    let moments = (m20 / n, m11 / n, m02 / n);

    let bbox_center = bbox.center();
    let extent = (bbox.width() as f64, bbox.height() as f64);
    let diag = extent.0.hypot(extent.1);
    let centroid_shift = centroid.distance(bbox_center) / diag;

    let mut metrics = RegionMetrics {
        area: pixels.len(),
        bbox,
        bbox_center,
        centroid,
        bbox_extent: extent,
        moments,
        line_similarity: 0.0,
        centroid_shift,
    };
    let (l1, l2) = metrics.principal_variances();
    // Relative guard: a pixel-exact straight run has a minor moment that is
    // zero up to rounding.
    metrics.line_similarity = if l2 <= 1e-12 * l1.max(1.0) { 1.0 } else { (1.0 - l2 / l1).sqrt().clamp(0.0, 1.0) };
    Ok(metrics)
}

/// Label image (0 = background) and the number of labels.
pub fn label_image(img: &BinaryImage, connectivity: Connectivity) -> (Vec<u32>, usize) {
    let (w, h) = (img.width(), img.height());
    let mut labels = vec![0u32; w * h];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !img.data()[start] || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for (dx, dy) in neighbours(connectivity) {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if img.data()[j] && labels[j] == 0 {
                    labels[j] = next;
                    stack.push(j);
                }
            }
        }
    }
    (labels, next as usize)
}

fn neighbours(c: Connectivity) -> &'static [(i64, i64)] {
    match c {
        Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
        Connectivity::Eight => &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)],
    }
}

/// All foreground components with their metrics.
pub fn connected_components(img: &BinaryImage, connectivity: Connectivity) -> Vec<Region> {
    let (labels, n) = label_image(img, connectivity);
    let mut buckets: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let w = img.width();
    for (i, &l) in labels.iter().enumerate() {
        if l > 0 {
            buckets[l as usize - 1].push((i % w, i / w));
        }
    }
    buckets
        .into_iter()
        .enumerate()
        .map(|(i, px)| Region::from_pixels(i + 1, px).expect("labels are non-empty"))
        .collect()
}

/// Split the image into components of area `>= min_area` (kept, as an
/// image) and the smaller ones (returned as regions).
pub fn remove_small_regions(img: &BinaryImage, min_area: usize) -> (BinaryImage, Vec<Region>) {
    let mut kept = img.clone();
    let mut removed = Vec::new();
    for region in connected_components(img, Connectivity::Eight) {
        if region.area() < min_area.max(1) {
            kept.clear_pixels(&region.pixels);
            removed.push(region);
        }
    }
    (kept, removed)
}
