//! Staged segmentation of a text-stripped truss sketch.
//!
//! Joints are the blobs that survive an erosion, members are straight ink
//! runs between joint centres, and whatever is left after masking both out is
//! classified into load arrows and support triangles.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{point_segment_distance, wrap_deg_180, wrap_deg_360, Point};
use crate::raster::{
    connected_components, erode, fill_holes, label_image, remove_small_regions, stroke_thickness, BinaryImage,
    Connectivity, Region, StructuringElement,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SegmentError {
    #[error("no joints found")]
    NoJoints,
    #[error("ambiguous arrow")]
    AmbiguousArrow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub id: usize,
    pub center: Point,
    pub radius_est: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemberSeg {
    pub id: usize,
    pub joint_a: usize,
    pub joint_b: usize,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrowSeg {
    pub id: usize,
    pub region: Region,
    /// Direction of tail to tip, degrees in `[0, 360)`, counter-clockwise
    /// from +x with y pointing up.
    pub orientation_deg: f64,
    pub tip: Point,
    pub tail: Point,
    pub target_joint: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportKind {
    Pinned,
    Roller,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportSeg {
    pub id: usize,
    pub kind: SupportKind,
    pub apex_joint: usize,
    /// Rolling direction in `[0, 180)`, math convention; rollers only.
    pub roll_angle_deg: Option<f64>,
    pub apex: Point,
    pub region: Region,
}

/// Supports found by [`detect_supports`] plus triangles with no joint near
/// their apex.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SupportScan {
    pub supports: Vec<SupportSeg>,
    pub orphans: Vec<Region>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrowParams {
    pub line_similarity_min: f64,
    pub centroid_shift_min: f64,
}

impl Default for ArrowParams {
    fn default() -> Self {
        Self { line_similarity_min: 0.95, centroid_shift_min: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportParams {
    pub fill_band: (f64, f64),
    pub centroid_shift_min: f64,
    /// Dilation disk diameter as a fraction of the longer bbox side.
    pub dilation_fraction: f64,
    pub line_similarity_min: f64,
    /// Apex must lie within this many joint radii of the joint centre.
    pub attach_factor: f64,
}

impl Default for SupportParams {
    fn default() -> Self {
        Self {
            fill_band: (0.65, 0.75),
            centroid_shift_min: 0.01,
            dilation_fraction: 0.20,
            line_similarity_min: 0.95,
            attach_factor: 3.0,
        }
    }
}

/// Joint erosion radius derived from the drawing: `round(1.5 x stroke)`.
pub fn auto_se_radius(img: &BinaryImage) -> Option<f64> {
    stroke_thickness(img).map(|t| (1.5 * t).round().max(1.0))
}

pub fn detect_joints(img: &BinaryImage, se_radius: f64) -> Result<Vec<Joint>, SegmentError> {
    let se = StructuringElement::disk(se_radius.max(1.0));
    let survivors = connected_components(&erode(img, &se), Connectivity::Eight);
    if survivors.is_empty() {
        return Err(SegmentError::NoJoints);
    }
    Ok(survivors
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let area = dilated_area(&r.pixels, &se);
            Joint { id: i + 1, center: r.centroid(), radius_est: (area as f64 / std::f64::consts::PI).sqrt() }
        })
        .collect())
}

/// Pixel count of `pixels` dilated by `se`, on an unbounded canvas.
fn dilated_area(pixels: &[(usize, usize)], se: &StructuringElement) -> usize {
    let mut set = BTreeSet::new();
    for &(x, y) in pixels {
        for &(dx, dy) in se.offsets() {
            set.insert((x as i64 + dx as i64, y as i64 + dy as i64));
        }
    }
    set.len()
}

/// True when some foreground pixel centre lies within 1 px of `p`.
fn ink_near(img: &BinaryImage, p: Point) -> bool {
    let (x0, x1) = ((p.x - 1.0).floor() as i64, (p.x + 1.0).ceil() as i64);
    let (y0, y1) = ((p.y - 1.0).floor() as i64, (p.y + 1.0).ceil() as i64);
    for y in y0..=y1 {
        for x in x0..=x1 {
            let (dx, dy) = (x as f64 - p.x, y as f64 - p.y);
            if dx * dx + dy * dy <= 1.0 + 1e-9 && img.get_or(x, y, false) {
                return true;
            }
        }
    }
    false
}

/// Fraction of unit-spaced samples on the centre-to-centre segment that lie
/// near ink, skipping `1.5 x radius_est` around each joint. `None` when the
/// joints are too close for any sample to remain.
pub fn member_coverage(img: &BinaryImage, a: &Joint, b: &Joint) -> Option<f64> {
    let d = a.center.distance(b.center);
    let (ea, eb) = (1.5 * a.radius_est, 1.5 * b.radius_est);
    let span = d - ea - eb;
    if span <= 0.0 {
        return None;
    }
    let dir = (b.center - a.center) * (1.0 / d);
    let n = span.floor() as usize + 1;
    let hits = (0..n).filter(|&k| ink_near(img, a.center + dir * (ea + k as f64))).count();
    Some(hits as f64 / n as f64)
}

pub fn detect_members(img: &BinaryImage, joints: &[Joint], coverage_min: f64) -> Vec<MemberSeg> {
    let mut candidates: Vec<(usize, usize, f64)> = Vec::new();
    for (i, a) in joints.iter().enumerate() {
        for b in &joints[i + 1..] {
            if let Some(c) = member_coverage(img, a, b) {
                if c >= coverage_min {
                    candidates.push((a.id.min(b.id), a.id.max(b.id), c));
                }
            }
        }
    }
    let pairs: BTreeSet<(usize, usize)> = candidates.iter().map(|&(a, b, _)| (a, b)).collect();
    let has = |p: usize, q: usize| pairs.contains(&(p.min(q), p.max(q)));
    let center = |id: usize| joints.iter().find(|j| j.id == id).map(|j| j.center).unwrap_or_default();

    let mut kept: Vec<(usize, usize, f64)> = candidates
        .iter()
        .copied()
        .filter(|&(i, k, _)| {
            let (ci, ck) = (center(i), center(k));
            let span = ci.distance(ck);
            let tol = (0.01 * span).max(2.0);
            !joints.iter().any(|j| {
                if j.id == i || j.id == k || !has(i, j.id) || !has(j.id, k) {
                    return false;
                }
                let t = (j.center - ci).dot(ck - ci) / (span * span);
                t > 0.0 && t < 1.0 && point_segment_distance(j.center, ci, ck) <= tol
            })
        })
        .collect();
    kept.sort_by_key(|x| (x.0, x.1));
    kept.into_iter()
        .enumerate()
        .map(|(n, (a, b, c))| MemberSeg { id: n + 1, joint_a: a, joint_b: b, coverage: c })
        .collect()
}

/// Clear joint disks (radius `1.5 x radius_est`) and member bands of the
/// given half width around each centre line.
pub fn subtract_segmented(img: &BinaryImage, joints: &[Joint], members: &[MemberSeg], half_width: f64) -> BinaryImage {
    let mut out = img.clone();
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut clear_near = |lo: Point, hi: Point, pad: f64, hit: &dyn Fn(Point) -> bool| {
        let x0 = ((lo.x - pad).floor() as i64).max(0);
        let y0 = ((lo.y - pad).floor() as i64).max(0);
        let x1 = ((hi.x + pad).ceil() as i64).min(w - 1);
        let y1 = ((hi.y + pad).ceil() as i64).min(h - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                if hit(Point::new(x as f64, y as f64)) {
                    out.set(x as usize, y as usize, false);
                }
            }
        }
    };
    for j in joints {
        let r = 1.5 * j.radius_est;
        clear_near(j.center, j.center, r, &|p| p.distance(j.center) <= r);
    }
    for m in members {
        let (Some(a), Some(b)) = (find_joint(joints, m.joint_a), find_joint(joints, m.joint_b)) else {
            continue;
        };
        let (a, b) = (a.center, b.center);
        let lo = Point::new(a.x.min(b.x), a.y.min(b.y));
        let hi = Point::new(a.x.max(b.x), a.y.max(b.y));
        clear_near(lo, hi, half_width, &|p| point_segment_distance(p, a, b) <= half_width);
    }
    out
}

fn find_joint(joints: &[Joint], id: usize) -> Option<&Joint> {
    joints.iter().find(|j| j.id == id)
}

pub fn detect_arrows(residual: &BinaryImage) -> Vec<Region> {
    detect_arrows_with(residual, &ArrowParams::default())
}

pub fn detect_arrows_with(residual: &BinaryImage, params: &ArrowParams) -> Vec<Region> {
    connected_components(residual, Connectivity::Eight)
        .into_iter()
        .filter(|r| r.line_similarity() > params.line_similarity_min && r.centroid_shift() > params.centroid_shift_min)
        .collect()
}

/// Image-space vector to math-convention angle in degrees, `[0, 360)`.
fn math_angle_deg(v: Point) -> f64 {
    wrap_deg_360((-v.y).atan2(v.x).to_degrees())
}

/// Index of the joint nearest `p`; the lowest id wins ties.
fn nearest_joint(joints: &[Joint], p: Point) -> Option<&Joint> {
    let mut best: Option<(&Joint, f64)> = None;
    let mut sorted: Vec<&Joint> = joints.iter().collect();
    sorted.sort_by_key(|j| j.id);
    for j in sorted {
        let d = j.center.distance(p);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((j, d));
        }
    }
    best.map(|(j, _)| j)
}

pub fn arrow_geometry(id: usize, region: &Region, joints: &[Joint]) -> Result<ArrowSeg, SegmentError> {
    let axis = region.metrics.major_axis().ok_or(SegmentError::AmbiguousArrow)?;
    let c = region.centroid();
    let head_side = (c - region.bbox_center()).dot(axis);
    if head_side == 0.0 {
        return Err(SegmentError::AmbiguousArrow);
    }
    let axis = if head_side > 0.0 { axis } else { axis * -1.0 };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &region.pixels {
        let t = (Point::new(x as f64, y as f64) - c).dot(axis);
        lo = lo.min(t);
        hi = hi.max(t);
    }
    let tip = c + axis * hi;
    let tail = c + axis * lo;
    let target = nearest_joint(joints, tip).ok_or(SegmentError::NoJoints)?;
    Ok(ArrowSeg {
        id,
        region: region.clone(),
        orientation_deg: math_angle_deg(tip - tail),
        tip,
        tail,
        target_joint: target.id,
    })
}

/// Orientation from the bounding-box corner nearest the centroid, pointing
/// from the opposite corner. Only meaningful for diagonal arrows.
pub fn arrow_corner_orientation(region: &Region) -> f64 {
    let b = region.bbox();
    let (x0, y0, x1, y1) = (b.min_x as f64, b.min_y as f64, b.max_x as f64, b.max_y as f64);
    let corners = [(x0, y0, x1, y1), (x1, y0, x0, y1), (x0, y1, x1, y0), (x1, y1, x0, y0)];
    let c = region.centroid();
    let (cx, cy, ox, oy) = corners
        .iter()
        .copied()
        .min_by(|a, b| {
            let da = c.distance(Point::new(a.0, a.1));
            let db = c.distance(Point::new(b.0, b.1));
            da.total_cmp(&db)
        })
        .expect("four corners");
    math_angle_deg(Point::new(cx - ox, cy - oy))
}

pub fn detect_supports(residual: &BinaryImage, joints: &[Joint]) -> SupportScan {
    detect_supports_with(residual, joints, &SupportParams::default())
}

pub fn detect_supports_with(residual: &BinaryImage, joints: &[Joint], params: &SupportParams) -> SupportScan {
    let filled = fill_holes(residual);
    let (labels, _) = label_image(&filled, Connectivity::Eight);
    let regions = connected_components(&filled, Connectivity::Eight);
    let (w, h) = (filled.width() as i64, filled.height() as i64);
    let mut scan = SupportScan::default();

    for tri in &regions {
        let fr = tri.metrics.fill_ratio();
        if fr < params.fill_band.0 || fr > params.fill_band.1 || tri.centroid_shift() <= params.centroid_shift_min {
            continue;
        }
        let (lbx, lby) = tri.metrics.bbox_extent;
        let se = StructuringElement::disk(0.5 * params.dilation_fraction * lbx.max(lby));
        // Labels touched by the dilated triangle or 8-adjacent to it.
        let mut touched = BTreeSet::new();
        for &(x, y) in &tri.pixels {
            for &(dx, dy) in se.offsets() {
                for ny in -1..=1 {
                    for nx in -1..=1 {
                        let (px, py) = (x as i64 + dx as i64 + nx, y as i64 + dy as i64 + ny);
                        if px < 0 || py < 0 || px >= w || py >= h {
                            continue;
                        }
                        let l = labels[(py * w + px) as usize] as usize;
                        if l != 0 && l != tri.id {
                            touched.insert(l);
                        }
                    }
                }
            }
        }
        let roll_angle = match touched.iter().next() {
            Some(&l) if touched.len() == 1 => {
                let partner = &regions[l - 1];
                if partner.line_similarity() > params.line_similarity_min {
                    partner.metrics.major_axis().map(|a| wrap_deg_180((-a.y).atan2(a.x).to_degrees()))
                } else {
                    None
                }
            }
            _ => None,
        };

        let apex = apex_point(tri);
        let attached =
            nearest_joint(joints, apex).filter(|j| j.center.distance(apex) <= params.attach_factor * j.radius_est);
        match attached {
            Some(j) => scan.supports.push(SupportSeg {
                id: scan.supports.len() + 1,
                kind: if roll_angle.is_some() { SupportKind::Roller } else { SupportKind::Pinned },
                apex_joint: j.id,
                roll_angle_deg: roll_angle,
                apex,
                region: tri.clone(),
            }),
            None => scan.orphans.push(tri.clone()),
        }
    }
    scan
}

/// Middle of the bbox side facing away from the centroid shift.
fn apex_point(r: &Region) -> Point {
    let b = r.bbox();
    let c = r.bbox_center();
    let v = r.centroid() - c;
    if v.y.abs() >= v.x.abs() {
        Point::new(c.x, if v.y > 0.0 { b.min_y as f64 } else { b.max_y as f64 })
    } else {
        Point::new(if v.x > 0.0 { b.min_x as f64 } else { b.max_x as f64 }, c.y)
    }
}

/// Tunables of the staged segmentation.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentParams {
    /// Joint erosion radius; derived from stroke thickness when `None`.
    pub se_radius: Option<f64>,
    pub coverage_min: f64,
    /// Residual components smaller than this are dropped as specks.
    pub residual_min_area: usize,
    pub arrows: ArrowParams,
    pub supports: SupportParams,
}

impl Default for SegmentParams {
    fn default() -> Self {
        Self {
            se_radius: None,
            coverage_min: 0.90,
            residual_min_area: 20,
            arrows: ArrowParams::default(),
            supports: SupportParams::default(),
        }
    }
}

/// Everything the staged segmentation produced, with the intermediate masks.
#[derive(Debug, Clone)]
pub struct Segmentation {
    pub stroke_px: f64,
    pub se_radius: f64,
    pub joints: Vec<Joint>,
    pub members: Vec<MemberSeg>,
    pub arrows: Vec<ArrowSeg>,
    pub supports: SupportScan,
    /// Arrow-like regions whose direction could not be decided.
    pub ambiguous_arrows: Vec<Region>,
    /// `(name, mask)` after each stage, in stage order.
    pub stages: Vec<(String, BinaryImage)>,
}

/// Run joints, members, subtraction, arrows, arrow removal and supports in
/// that order, each stage consuming the previous residual.
pub fn segment(img: &BinaryImage, params: &SegmentParams) -> Result<Segmentation, SegmentError> {
    let stroke_px = stroke_thickness(img).ok_or(SegmentError::NoJoints)?;
    let se_radius = params.se_radius.unwrap_or_else(|| (1.5 * stroke_px).round().max(1.0));
    let mut stages = vec![("input".to_string(), img.clone())];

    let joints = detect_joints(img, se_radius)?;
    stages.push(("joints".to_string(), erode(img, &StructuringElement::disk(se_radius))));
    let members = detect_members(img, &joints, params.coverage_min);
    let residual = subtract_segmented(img, &joints, &members, 0.5 * stroke_px + 1.0);
    let (residual, _) = remove_small_regions(&residual, params.residual_min_area);
    stages.push(("residual".to_string(), residual.clone()));

    let mut arrows = Vec::new();
    let mut ambiguous_arrows = Vec::new();
    let mut without_arrows = residual.clone();
    for region in detect_arrows_with(&residual, &params.arrows) {
        without_arrows.clear_pixels(&region.pixels);
        match arrow_geometry(arrows.len() + 1, &region, &joints) {
            Ok(a) => arrows.push(a),
            Err(_) => ambiguous_arrows.push(region),
        }
    }
    stages.push(("arrows-removed".to_string(), without_arrows.clone()));
    let supports = detect_supports_with(&without_arrows, &joints, &params.supports);

    Ok(Segmentation { stroke_px, se_radius, joints, members, arrows, supports, ambiguous_arrows, stages })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(img: &mut BinaryImage, cx: f64, cy: f64, r: f64) {
        for y in 0..img.height() {
            for x in 0..img.width() {
                if (x as f64 - cx).hypot(y as f64 - cy) <= r {
                    img.set(x, y, true);
                }
            }
        }
    }

    fn stroke(img: &mut BinaryImage, a: Point, b: Point, half: f64) {
        for y in 0..img.height() {
            for x in 0..img.width() {
                if point_segment_distance(Point::new(x as f64, y as f64), a, b) <= half {
                    img.set(x, y, true);
                }
            }
        }
    }

    #[test]
    fn two_disks_joined_by_a_line() {
        let mut img = BinaryImage::new(120, 60);
        disk(&mut img, 20.0, 30.0, 8.0);
        disk(&mut img, 95.0, 30.0, 8.0);
        stroke(&mut img, Point::new(20.0, 30.0), Point::new(95.0, 30.0), 1.0);
        let joints = detect_joints(&img, 4.0).unwrap();
        assert_eq!(joints.len(), 2);
        assert!(joints[0].center.distance(Point::new(20.0, 30.0)) < 1.0);
        assert!(joints[1].center.distance(Point::new(95.0, 30.0)) < 1.0);
        let members = detect_members(&img, &joints, 0.9);
        assert_eq!(members.len(), 1);
        assert_eq!((members[0].joint_a, members[0].joint_b), (1, 2));
    }

    #[test]
    fn single_disk_center_and_radius() {
        let mut img = BinaryImage::new(50, 50);
        disk(&mut img, 24.0, 21.0, 10.0);
        let joints = detect_joints(&img, 4.0).unwrap();
        assert_eq!(joints.len(), 1);
        assert!(joints[0].center.distance(Point::new(24.0, 21.0)) < 0.5);
        assert!((joints[0].radius_est - 10.0).abs() < 1.0, "{}", joints[0].radius_est);
    }

    #[test]
    fn blank_has_no_joints() {
        assert_eq!(detect_joints(&BinaryImage::new(30, 30), 4.0), Err(SegmentError::NoJoints));
    }

    fn joint(id: usize, x: f64, y: f64) -> Joint {
        Joint { id, center: Point::new(x, y), radius_est: 8.0 }
    }

    #[test]
    fn no_ink_no_member() {
        let img = BinaryImage::new(100, 40);
        assert!(detect_members(&img, &[joint(1, 10.0, 20.0), joint(2, 90.0, 20.0)], 0.9).is_empty());
    }

    #[test]
    fn collinear_span_is_suppressed() {
        let mut img = BinaryImage::new(220, 40);
        stroke(&mut img, Point::new(10.0, 20.0), Point::new(210.0, 20.0), 1.0);
        let joints = [joint(1, 10.0, 20.0), joint(2, 110.0, 20.0), joint(3, 210.0, 20.0)];
        let members = detect_members(&img, &joints, 0.9);
        let pairs: Vec<_> = members.iter().map(|m| (m.joint_a, m.joint_b)).collect();
        assert_eq!(pairs, vec![(1, 2), (2, 3)]);
    }

    #[test]
    fn triangle_of_members() {
        let mut img = BinaryImage::new(160, 140);
        let p = [Point::new(20.0, 120.0), Point::new(140.0, 120.0), Point::new(80.0, 20.0)];
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            stroke(&mut img, p[a], p[b], 1.0);
        }
        for q in p {
            disk(&mut img, q.x, q.y, 8.0);
        }
        let joints = detect_joints(&img, 4.0).unwrap();
        assert_eq!(joints.len(), 3);
        assert_eq!(detect_members(&img, &joints, 0.9).len(), 3);
        let residual = subtract_segmented(&img, &joints, &detect_members(&img, &joints, 0.9), 2.0);
        assert!(residual.count_foreground() * 50 < img.count_foreground());
    }

    fn arrow_image(w: usize, h: usize, tail: Point, tip: Point) -> BinaryImage {
        let mut img = BinaryImage::new(w, h);
        stroke(&mut img, tail, tip, 1.0);
        let dir = (tip - tail).normalized().unwrap();
        let base = tip - dir * 14.0;
        let n = dir.perp();
        for y in 0..h {
            for x in 0..w {
                let p = Point::new(x as f64, y as f64);
                let t = (p - base).dot(dir);
                let s = (p - base).dot(n).abs();
                if (0.0..=14.0).contains(&t) && s <= 6.0 * (1.0 - t / 14.0) {
                    img.set(x, y, true);
                }
            }
        }
        img
    }

    #[test]
    fn downward_arrow_geometry() {
        let img = arrow_image(60, 120, Point::new(30.0, 10.0), Point::new(30.0, 80.0));
        let arrows = detect_arrows(&img);
        assert_eq!(arrows.len(), 1);
        let j = [joint(1, 30.0, 96.0), joint(2, 30.0, 4.0)];
        let a = arrow_geometry(1, &arrows[0], &j).unwrap();
        assert!((a.orientation_deg - 270.0).abs() < 1.0, "{}", a.orientation_deg);
        assert_eq!(a.target_joint, 1);
    }

    #[test]
    fn diagonal_arrow_corner_rule_agrees() {
        let img = arrow_image(100, 100, Point::new(10.0, 90.0), Point::new(85.0, 15.0));
        let arrows = detect_arrows(&img);
        assert_eq!(arrows.len(), 1);
        let a = arrow_geometry(1, &arrows[0], &[joint(1, 95.0, 5.0)]).unwrap();
        let corner = arrow_corner_orientation(&arrows[0]);
        assert!((a.orientation_deg - 45.0).abs() < 2.0, "{}", a.orientation_deg);
        assert!(crate::geometry::angle_diff_deg(a.orientation_deg, corner, 360.0) < 5.0);
    }

    #[test]
    fn equidistant_joints_pick_lowest_id() {
        let img = arrow_image(60, 120, Point::new(30.0, 10.0), Point::new(30.0, 80.0));
        assert!(arrow_geometry(1, &detect_arrows(&img)[0], &[]).is_err());
        let j = [joint(4, 10.0, 0.0), joint(2, -10.0, 0.0), joint(3, 0.0, 10.0)];
        assert_eq!(nearest_joint(&j, Point::new(0.0, 0.0)).unwrap().id, 2);
    }

    #[test]
    fn plain_line_and_disk_are_not_arrows() {
        let mut img = BinaryImage::new(120, 60);
        stroke(&mut img, Point::new(10.0, 10.0), Point::new(100.0, 10.0), 1.0);
        disk(&mut img, 60.0, 40.0, 10.0);
        assert!(detect_arrows(&img).is_empty());
    }

    /// Isosceles triangle pointing up with its apex at `apex`, rows with
    /// `y < apex.y + trim` removed.
    fn trimmed_triangle(img: &mut BinaryImage, apex: Point, half_base: f64, height: f64, trim: f64) {
        for y in 0..img.height() {
            for x in 0..img.width() {
                let t = y as f64 - apex.y;
                if t < trim || t > height {
                    continue;
                }
                if (x as f64 - apex.x).abs() <= half_base * t / height {
                    img.set(x, y, true);
                }
            }
        }
    }

    #[test]
    fn trimmed_triangle_is_pinned_support() {
        let mut img = BinaryImage::new(80, 80);
        trimmed_triangle(&mut img, Point::new(40.0, 20.0), 15.0, 40.0, 16.0);
        let scan = detect_supports(&img, &[joint(1, 40.0, 14.0)]);
        assert_eq!(scan.supports.len(), 1, "{scan:?}");
        assert_eq!(scan.supports[0].kind, SupportKind::Pinned);
        assert_eq!(scan.supports[0].roll_angle_deg, None);
        assert_eq!(scan.supports[0].apex_joint, 1);
    }

    #[test]
    fn line_under_triangle_makes_a_roller() {
        let mut img = BinaryImage::new(80, 80);
        trimmed_triangle(&mut img, Point::new(40.0, 20.0), 15.0, 40.0, 16.0);
        for x in 20..61 {
            for y in 64..67 {
                img.set(x, y, true);
            }
        }
        let scan = detect_supports(&img, &[joint(1, 40.0, 14.0)]);
        assert_eq!(scan.supports.len(), 1);
        assert_eq!(scan.supports[0].kind, SupportKind::Roller);
        assert!(scan.supports[0].roll_angle_deg.unwrap().abs() < 1e-9);
    }

    #[test]
    fn full_triangle_is_outside_band_and_far_triangle_is_orphan() {
        let mut img = BinaryImage::new(80, 80);
        trimmed_triangle(&mut img, Point::new(40.0, 10.0), 30.0, 60.0, 0.0);
        assert!(detect_supports(&img, &[joint(1, 40.0, 5.0)]).supports.is_empty());

        let mut img = BinaryImage::new(80, 80);
        trimmed_triangle(&mut img, Point::new(40.0, 20.0), 15.0, 40.0, 16.0);
        let scan = detect_supports(&img, &[joint(1, 5.0, 75.0)]);
        assert!(scan.supports.is_empty());
        assert_eq!(scan.orphans.len(), 1);
    }
}
