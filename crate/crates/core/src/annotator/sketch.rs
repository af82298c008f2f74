//! Synthetic hand-drawing stand-ins: render a model as a sketch in the symbol
//! vocabulary the segmenter reads, and generate random determinate trusses.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::draw::{arrow_shapes, text_pixels, Shape};
use crate::geometry::{point_segment_distance, segment_segment_distance, Point};
use crate::raster::{dilate, BinaryImage, GrayImage, StructuringElement};
use crate::segmenter::SupportKind;
use crate::textreader::{parse_load_label, TemplateSet};
use crate::trussmodel::{LoadSpec, MemberSpec, Node, SupportSpec, TrussModel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SketchError {
    #[error("unrenderable layout: {0}")]
    UnrenderableLayout(String),
    #[error("degenerate truss: at least 3 joints are needed")]
    DegenerateTruss,
}

fn unrenderable(msg: impl Into<String>) -> SketchError {
    SketchError::UnrenderableLayout(msg.into())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SketchParams {
    pub width: usize,
    pub height: usize,
    pub stroke_px: f64,
    pub joint_radius_px: f64,
    /// Arrow length from tail to tip.
    pub arrow_length_px: f64,
    pub arrow_head_length_px: f64,
    pub arrow_head_half_width_px: f64,
    /// Gap between a joint centre and the arrow tip pointing at it.
    pub arrow_gap_px: f64,
    /// Template font magnification and per-character advance.
    pub font_scale: usize,
    pub font_advance_px: usize,
    /// Labels are tilted uniformly within this many degrees of level.
    pub slope_jitter_deg: f64,
}

impl Default for SketchParams {
    fn default() -> Self {
        Self {
            width: 1000,
            height: 700,
            stroke_px: 3.0,
            joint_radius_px: 9.0,
            arrow_length_px: 70.0,
            arrow_head_length_px: 14.0,
            arrow_head_half_width_px: 6.0,
            arrow_gap_px: 16.0,
            font_scale: 2,
            font_advance_px: 18,
            slope_jitter_deg: 10.0,
        }
    }
}

// Support symbol, measured along its axis from the joint centre.
const TRI_APEX: f64 = 5.0;
const TRI_HEIGHT: f64 = 18.0;
const TRI_HALF_BASE: f64 = 7.0;
const ROLLER_GAP: f64 = 2.0;
const ROLLER_HALF_THICKNESS: f64 = 2.0;
const ROLLER_HALF_LENGTH: f64 = 22.0;

const MARGIN: f64 = 6.0;
const OWN_MEMBER_CLEARANCE: f64 = 6.0;
const STRUCTURE_CLEARANCE: f64 = 10.0;
const LABEL_STRUCTURE_CLEARANCE: usize = 8;
const LABEL_LABEL_CLEARANCE: usize = 20;

fn image_dir(deg: f64) -> Point {
    let (s, c) = deg.to_radians().sin_cos();
    Point::new(c, -s)
}

fn support_shapes(center: Point, axis: Point, kind: SupportKind) -> Vec<Shape> {
    let apex = center + axis * TRI_APEX;
    let base = apex + axis * TRI_HEIGHT;
    let n = axis.perp() * TRI_HALF_BASE;
    let mut shapes = vec![Shape::Triangle([apex, base + n, base - n])];
    if kind == SupportKind::Roller {
        shapes.push(Shape::Band {
            center: base + axis * (ROLLER_GAP + ROLLER_HALF_THICKNESS),
            axis: axis.perp(),
            half_length: ROLLER_HALF_LENGTH,
            half_width: ROLLER_HALF_THICKNESS,
        });
    }
    shapes
}

/// Candidate support axes (apex to base) in preference order.
fn support_axes(kind: SupportKind, roll_angle_deg: Option<f64>) -> Vec<Point> {
    match kind {
        SupportKind::Roller => {
            let t = image_dir(roll_angle_deg.unwrap_or(0.0));
            let n = Point::new(-t.y, t.x);
            let n = if n.y < 0.0 || (n.y == 0.0 && n.x < 0.0) { n * -1.0 } else { n };
            vec![n, n * -1.0]
        }
        SupportKind::Pinned => {
            [270.0, 180.0, 0.0, 90.0, 225.0, 315.0, 135.0, 45.0].iter().map(|&d| image_dir(d)).collect()
        }
    }
}

struct Plan {
    structure: BinaryImage,
    /// `(load index, arrow bbox centre)` for drawn arrows.
    arrow_centers: Vec<(usize, Point)>,
    member_mids: Vec<Point>,
}

/// Sample points of a shape, used for clearance tests.
fn samples(shape: &Shape) -> Vec<Point> {
    shape.pixels().into_iter().map(|(x, y)| Point::new(x as f64, y as f64)).collect()
}

fn inside(p: Point, params: &SketchParams) -> bool {
    p.x >= MARGIN
        && p.y >= MARGIN
        && p.x <= params.width as f64 - 1.0 - MARGIN
        && p.y <= params.height as f64 - 1.0 - MARGIN
}

fn plan_structure(model: &TrussModel, params: &SketchParams) -> Result<Plan, SketchError> {
    let r = params.joint_radius_px;
    let pos = |id: usize| model.node(id).map(|n| n.pos_px).ok_or_else(|| unrenderable(format!("missing node {id}")));
    for (i, a) in model.nodes.iter().enumerate() {
        if !inside(a.pos_px, params)
            || !inside(a.pos_px + Point::new(r, r), params)
            || !inside(a.pos_px - Point::new(r, r), params)
        {
            return Err(unrenderable(format!("node {} outside the canvas", a.id)));
        }
        for b in &model.nodes[i + 1..] {
            if a.pos_px.distance(b.pos_px) < 4.0 * r {
                return Err(unrenderable(format!("nodes {} and {} overlap", a.id, b.id)));
            }
        }
    }
    let mut segments = Vec::new();
    for m in &model.members {
        let (a, b) = (pos(m.node_a)?, pos(m.node_b)?);
        for n in &model.nodes {
            if n.id != m.node_a && n.id != m.node_b && point_segment_distance(n.pos_px, a, b) < r + STRUCTURE_CLEARANCE
            {
                return Err(unrenderable(format!("member {} passes node {}", m.id, n.id)));
            }
        }
        segments.push((m.node_a, m.node_b, a, b));
    }
    let near_member = |p: Point, own: Option<usize>, clearance: f64| {
        segments.iter().any(|&(na, nb, a, b)| {
            let own_member = own.is_some_and(|o| o == na || o == nb);
            let d = point_segment_distance(p, a, b);
            if own_member {
                // Near the own joint the disk hides the member anyway.
                p.distance(if Some(na) == own { a } else { b }) > r && d < OWN_MEMBER_CLEARANCE
            } else {
                d < clearance
            }
        })
    };
    let near_node = |p: Point, own: Option<usize>, clearance: f64| {
        model.nodes.iter().any(|n| Some(n.id) != own && n.pos_px.distance(p) < r + clearance)
    };

    let half_stroke = params.stroke_px / 2.0;
    let mut shapes: Vec<Shape> = Vec::new();
    for n in &model.nodes {
        shapes.push(Shape::Disk { center: n.pos_px, radius: r });
    }
    for &(_, _, a, b) in &segments {
        shapes.push(Shape::Capsule { a, b, half_width: half_stroke });
    }

    let mut taken: Vec<Point> = Vec::new();
    for s in &model.supports {
        let c = pos(s.node)?;
        let chosen = support_axes(s.kind, s.roll_angle_deg).into_iter().find_map(|axis| {
            let sh = support_shapes(c, axis, s.kind);
            let pts: Vec<Point> = sh.iter().flat_map(samples).filter(|p| p.distance(c) > r).collect();
            let clear = pts.iter().all(|&p| {
                inside(p, params)
                    && !near_member(p, Some(s.node), STRUCTURE_CLEARANCE)
                    && !near_node(p, Some(s.node), STRUCTURE_CLEARANCE)
                    && taken.iter().all(|&q| q.distance(p) >= STRUCTURE_CLEARANCE)
            });
            clear.then_some((sh, pts))
        });
        let (sh, pts) = chosen.ok_or_else(|| unrenderable(format!("no room for the support on node {}", s.node)))?;
        taken.extend(pts);
        shapes.extend(sh);
    }

    let mut arrow_centers = Vec::new();
    for (k, l) in model.loads.iter().enumerate() {
        let c = pos(l.node)?;
        let dir = image_dir(l.direction_deg);
        let tip = c - dir * params.arrow_gap_px;
        let sh = arrow_shapes(
            tip,
            dir,
            params.arrow_length_px,
            params.arrow_head_length_px,
            params.arrow_head_half_width_px,
            half_stroke,
        );
        let pts: Vec<Point> = sh.iter().flat_map(samples).collect();
        let clear = pts.iter().all(|&p| {
            inside(p, params)
                && !near_member(p, None, STRUCTURE_CLEARANCE + 2.0)
                && !near_node(p, Some(l.node), 2.0 * STRUCTURE_CLEARANCE)
                && p.distance(c) > r + 4.0
                && taken.iter().all(|&q| q.distance(p) >= STRUCTURE_CLEARANCE)
        });
        if !clear {
            return Err(unrenderable(format!("no room for the arrow of load {}", k + 1)));
        }
        let tail = tip - dir * params.arrow_length_px;
        arrow_centers.push((k, Point::new((tip.x + tail.x) / 2.0, (tip.y + tail.y) / 2.0)));
        taken.extend(pts);
        shapes.extend(sh);
    }

    let mut structure = BinaryImage::new(params.width, params.height);
    for s in &shapes {
        s.fill(&mut structure);
    }
    let member_mids = segments.iter().map(|&(_, _, a, b)| (a + b) * 0.5).collect();
    Ok(Plan { structure, arrow_centers, member_mids })
}

/// Label text for a magnitude in kN; small whole-newton values may be
/// written in N.
pub fn load_label(magnitude_kn: f64, rng: &mut impl Rng) -> String {
    let newtons = magnitude_kn * 1000.0;
    if magnitude_kn < 1.0 && newtons.fract() == 0.0 && rng.gen_bool(0.5) {
        return format!("{}N", newtons as i64);
    }
    let mut s = format!("{magnitude_kn:.2}");
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    format!("{s}kN")
}

/// Render `model` (pixel positions) as a black-on-white sketch. The seed
/// drives label wording and tilt only; geometry comes from the model.
pub fn generate_sketch(model: &TrussModel, params: &SketchParams, seed: u64) -> Result<GrayImage, SketchError> {
    let plan = plan_structure(model, params)?;
    let templates = TemplateSet::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ink = plan.structure.clone();
    let struct_keepout = dilate(&plan.structure, &StructuringElement::disk(LABEL_STRUCTURE_CLEARANCE as f64));
    let mut label_mask = BinaryImage::new(params.width, params.height);
    let label_se = StructuringElement::disk(LABEL_LABEL_CLEARANCE as f64);

    for &(k, mid) in &plan.arrow_centers {
        let Some(magnitude) = model.loads[k].magnitude_kn else { continue };
        let text = load_label(magnitude, &mut rng);
        let tilt = if params.slope_jitter_deg > 0.0 {
            rng.gen_range(-params.slope_jitter_deg..=params.slope_jitter_deg)
        } else {
            0.0
        };
        let dir = image_dir(model.loads[k].direction_deg);
        let perp = dir.perp();
        let label_keepout = dilate(&label_mask, &label_se);
        let probe = text_pixels(
            &templates,
            &text,
            Point::new(0.0, 0.0),
            tilt,
            params.font_scale,
            params.font_advance_px,
            &|_| None,
        );
        let half_extent =
            probe.iter().map(|&(x, y)| Point::new(x as f64, y as f64).dot(perp).abs()).fold(0.0, f64::max);

        let along_extent =
            probe.iter().map(|&(x, y)| Point::new(x as f64, y as f64).dot(dir).abs()).fold(0.0, f64::max);
        let mut candidates = Vec::new();
        for extra in [14.0, 24.0, 36.0, 50.0] {
            candidates.push(mid + perp * (half_extent + extra));
            candidates.push(mid - perp * (half_extent + extra));
            candidates.push(mid - dir * (0.5 * params.arrow_length_px + along_extent + extra));
        }
        let mut placed = None;
        for center in candidates {
            let c = Point::new(center.x.round(), center.y.round());
            let px = text_pixels(&templates, &text, c, tilt, params.font_scale, params.font_advance_px, &|_| None);
            let ok = px.iter().all(|&(x, y)| {
                inside(Point::new(x as f64, y as f64), params)
                    && !struct_keepout.get_or(x, y, false)
                    && !label_keepout.get_or(x, y, false)
            });
            if !ok {
                continue;
            }
            // The label must sit clearly nearest its own arrow.
            let bb_c = pixel_bbox_center(&px);
            let own = bb_c.distance(mid);
            let others = plan
                .arrow_centers
                .iter()
                .filter(|&&(j, _)| j != k)
                .map(|&(_, p)| p)
                .chain(plan.member_mids.iter().copied())
                .map(|p| bb_c.distance(p))
                .fold(f64::INFINITY, f64::min);
            if own < 0.8 * others {
                placed = Some(px);
                break;
            }
        }
        let px = placed.ok_or_else(|| unrenderable(format!("no room for the label of load {}", k + 1)))?;
        for (x, y) in px {
            label_mask.set_clipped(x, y, true);
            ink.set_clipped(x, y, true);
        }
    }

    let mut out = GrayImage::new(params.width, params.height, 255).map_err(|e| unrenderable(e.to_string()))?;
    out.paint(&ink, 0);
    Ok(out)
}

fn pixel_bbox_center(px: &[(i64, i64)]) -> Point {
    let x0 = px.iter().map(|p| p.0).min().unwrap_or(0);
    let x1 = px.iter().map(|p| p.0).max().unwrap_or(0);
    let y0 = px.iter().map(|p| p.1).min().unwrap_or(0);
    let y1 = px.iter().map(|p| p.1).max().unwrap_or(0);
    Point::new((x0 + x1) as f64 / 2.0, (y0 + y1) as f64 / 2.0)
}

const MAGNITUDES_KN: [f64; 12] = [2.5, 5.0, 7.5, 10.0, 12.5, 15.0, 20.0, 25.0, 30.0, 40.0, 0.5, 0.25];
const LOAD_DIRECTIONS: [f64; 12] = [270.0, 270.0, 270.0, 0.0, 180.0, 90.0, 45.0, 135.0, 225.0, 315.0, 240.0, 300.0];

fn angle_between(u: Point, v: Point) -> f64 {
    (u.dot(v) / (u.norm() * v.norm())).clamp(-1.0, 1.0).acos().to_degrees()
}

/// Place one Henneberg node attached to two existing nodes, or `None`.
fn place_node(
    nodes: &[Point],
    members: &[(usize, usize)],
    params: &SketchParams,
    rng: &mut ChaCha8Rng,
) -> Option<(Point, usize, usize)> {
    let (w, h) = (params.width as f64, params.height as f64);
    for _ in 0..400 {
        let p = Point::new(rng.gen_range(90.0..w - 90.0).round(), rng.gen_range(90.0..h - 130.0).round());
        if nodes.iter().any(|&q| q.distance(p) < 110.0) {
            continue;
        }
        let mut near: Vec<usize> = (0..nodes.len()).collect();
        near.sort_by(|&a, &b| nodes[a].distance(p).total_cmp(&nodes[b].distance(p)));
        near.truncate(4);
        near.shuffle(rng);
        let (a, b) = (near[0], near[1.min(near.len() - 1)]);
        if a == b {
            continue;
        }
        let (pa, pb) = (nodes[a], nodes[b]);
        let (la, lb) = (p.distance(pa), p.distance(pb));
        if !(110.0..=380.0).contains(&la) || !(110.0..=380.0).contains(&lb) {
            continue;
        }
        let at_p = angle_between(pa - p, pb - p);
        if !(35.0..=145.0).contains(&at_p) {
            continue;
        }
        let ok = [(a, pa), (b, pb)].iter().all(|&(end, pe)| {
            let others_clear =
                nodes.iter().enumerate().all(|(i, &q)| i == end || point_segment_distance(q, p, pe) >= 45.0);
            let crossings_clear = members.iter().all(|&(ma, mb)| {
                let (qa, qb) = (nodes[ma], nodes[mb]);
                if ma == end || mb == end {
                    let other = if ma == end { qb } else { qa };
                    angle_between(p - pe, other - pe) >= 30.0
                } else {
                    segment_segment_distance(p, pe, qa, qb) >= 30.0
                }
            });
            others_clear && crossings_clear
        });
        let existing_clear = members.iter().all(|&(ma, mb)| point_segment_distance(p, nodes[ma], nodes[mb]) >= 45.0);
        if ok && existing_clear {
            return Some((p, a, b));
        }
    }
    None
}

fn finish_model(points: &[Point], members: &[(usize, usize)], loads: &[(usize, f64, f64)]) -> TrussModel {
    // Number nodes in raster order so ids follow the segmenter's labelling.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| (points[a].y, points[a].x).partial_cmp(&(points[b].y, points[b].x)).unwrap());
    let mut id_of = vec![0; points.len()];
    for (rank, &i) in order.iter().enumerate() {
        id_of[i] = rank + 1;
    }
    let mut model = TrussModel {
        nodes: order.iter().map(|&i| Node { id: id_of[i], pos_px: points[i], pos_m: None }).collect(),
        members: members
            .iter()
            .map(|&(a, b)| MemberSpec { id: 0, node_a: id_of[a], node_b: id_of[b], name: None, ea: 1.0 })
            .collect(),
        supports: vec![
            SupportSpec { node: id_of[0], kind: SupportKind::Pinned, roll_angle_deg: None },
            SupportSpec { node: id_of[1], kind: SupportKind::Roller, roll_angle_deg: Some(0.0) },
        ],
        loads: loads
            .iter()
            .map(|&(n, m, d)| LoadSpec { node: id_of[n], magnitude_kn: Some(m), direction_deg: d })
            .collect(),
        scale_m_per_px: None,
    };
    model.renumber_members();
    model.supports.sort_by_key(|s| s.node);
    let span = model.node(1).unwrap().pos_px.distance(model.node(2).unwrap().pos_px);
    model.set_scale(4.0 / span);
    model
}

/// A random statically determinate truss in pixel coordinates, built by
/// repeatedly attaching a new joint to two existing ones. Joints 1 and 2 in
/// construction order carry a pin and a horizontal roller. Node 1 and 2 of
/// the result are 4 m apart.
pub fn random_truss(seed: u64, joints: usize, params: &SketchParams) -> Result<TrussModel, SketchError> {
    if joints < 3 {
        return Err(SketchError::DegenerateTruss);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (params.width as f64, params.height as f64);
    'attempt: for _ in 0..200 {
        let base_y = (h - 150.0).round();
        let x1 = rng.gen_range(100.0..w * 0.35).round();
        let x2 = (x1 + rng.gen_range(200.0..380.0f64)).min(w - 100.0).round();
        let mut points = vec![Point::new(x1, base_y), Point::new(x2, base_y)];
        let mut members = vec![(0, 1)];
        while points.len() < joints {
            let Some((p, a, b)) = place_node(&points, &members, params, &mut rng) else { continue 'attempt };
            let k = points.len();
            points.push(p);
            members.push((a, k));
            members.push((b, k));
        }

        let count = rng.gen_range(1..=joints.min(3));
        let mut candidates: Vec<usize> = (0..joints).collect();
        candidates.shuffle(&mut rng);
        let mut loads: Vec<(usize, f64, f64)> = Vec::new();
        for &node in &candidates {
            if loads.len() == count {
                break;
            }
            let magnitude = *MAGNITUDES_KN.choose(&mut rng).expect("non-empty");
            let mut dirs = LOAD_DIRECTIONS.to_vec();
            dirs.shuffle(&mut rng);
            // Prefer gravity when it fits.
            if rng.gen_bool(0.5) {
                dirs.insert(0, 270.0);
            }
            for d in dirs {
                loads.push((node, magnitude, d));
                let model = finish_model(&points, &members, &loads);
                if plan_structure(&model, params).is_ok() {
                    break;
                }
                loads.pop();
            }
        }
        if loads.is_empty() {
            continue;
        }
        let model = finish_model(&points, &members, &loads);
        if generate_sketch(&model, params, seed).is_ok() {
            return Ok(model);
        }
    }
    Err(unrenderable("no layout found for the random truss"))
}

/// A Warren truss with every symbol class present: at least 5 members, 5
/// load arrows, pinned supports and rollers at 0 and 90 degrees. Positions
/// are jittered by the seed. Returns the sketch and its ground truth.
pub fn hazard_map(seed: u64, params: &SketchParams) -> Result<(GrayImage, TrussModel), SketchError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut j = |x: f64, y: f64| {
        Point::new(x + rng.gen_range(-15.0..=15.0f64).round(), y + rng.gen_range(-15.0..=15.0f64).round())
    };
    let points = [
        j(200.0, 500.0),
        j(400.0, 500.0),
        j(600.0, 500.0),
        j(800.0, 500.0),
        j(300.0, 300.0),
        j(500.0, 300.0),
        j(700.0, 300.0),
    ];
    let pairs = [(0, 1), (1, 2), (2, 3), (4, 5), (5, 6), (0, 4), (4, 1), (1, 5), (5, 2), (2, 6), (6, 3)];
    let mags: Vec<f64> = (0..5).map(|_| *MAGNITUDES_KN[..10].choose(&mut rng).expect("non-empty")).collect();
    let loads = [(5, 270.0), (4, 270.0), (6, 270.0), (1, 90.0), (2, 60.0)];
    let mut model = TrussModel {
        nodes: points.iter().enumerate().map(|(i, &p)| Node { id: i + 1, pos_px: p, pos_m: None }).collect(),
        members: pairs
            .iter()
            .map(|&(a, b)| MemberSpec { id: 0, node_a: a + 1, node_b: b + 1, name: None, ea: 1.0 })
            .collect(),
        supports: vec![
            SupportSpec { node: 1, kind: SupportKind::Pinned, roll_angle_deg: None },
            SupportSpec { node: 4, kind: SupportKind::Roller, roll_angle_deg: Some(0.0) },
            SupportSpec { node: 5, kind: SupportKind::Roller, roll_angle_deg: Some(90.0) },
            SupportSpec { node: 7, kind: SupportKind::Pinned, roll_angle_deg: None },
        ],
        loads: loads
            .iter()
            .zip(&mags)
            .map(|(&(n, d), &m)| LoadSpec { node: n + 1, magnitude_kn: Some(m), direction_deg: d })
            .collect(),
        scale_m_per_px: None,
    };
    model.renumber_members();
    let span = model.nodes[0].pos_px.distance(model.nodes[3].pos_px);
    model.set_scale(12.0 / span);
    let img = generate_sketch(&model, params, seed)?;
    Ok((img, model))
}

/// Magnitude a generated label text stands for, as the parser reads it.
pub fn label_magnitude(text: &str) -> Option<f64> {
    parse_load_label(text).map(|(m, _, _)| m)
}
