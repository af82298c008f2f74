//! Independent checks shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use trussketch::geometry::Point;
use trussketch::segmenter::SupportKind;
use trussketch::trussmodel::{LoadSpec, MemberSpec, Node, SupportSpec, TrussModel};

/// One scalar unknown of the method of joints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Unknown {
    Member(usize),
    /// Reaction component along global x (0) or y (1) at a pin.
    Pin(usize, u8),
    /// Reaction magnitude along a roller's normal.
    Roller(usize),
}

/// Member forces by id and reactions by node.
pub type JointSolution = (BTreeMap<usize, f64>, BTreeMap<usize, [f64; 2]>);

/// Member forces (tension positive) and reactions found by visiting joints
/// with at most two unknowns left and solving their two equilibrium
/// equations, until nothing is unknown. `None` when the elimination stalls
/// or meets a singular joint.
pub fn method_of_joints(model: &TrussModel) -> Option<JointSolution> {
    let pos: BTreeMap<usize, Point> = model.nodes.iter().map(|n| n.pos_m.map(|p| (n.id, p))).collect::<Option<_>>()?;

    // Equations per node: list of (unknown, unit coefficient vector), plus the applied load.
    let mut terms: BTreeMap<usize, Vec<(Unknown, Point)>> = pos.keys().map(|&id| (id, Vec::new())).collect();
    let mut applied: BTreeMap<usize, Point> = pos.keys().map(|&id| (id, Point::default())).collect();
    for m in &model.members {
        let (a, b) = (pos[&m.node_a], pos[&m.node_b]);
        let e = (b - a).normalized()?;
        terms.get_mut(&m.node_a)?.push((Unknown::Member(m.id), e));
        terms.get_mut(&m.node_b)?.push((Unknown::Member(m.id), e * -1.0));
    }
    for s in &model.supports {
        let t = terms.get_mut(&s.node)?;
        match s.kind {
            SupportKind::Pinned => {
                t.push((Unknown::Pin(s.node, 0), Point::new(1.0, 0.0)));
                t.push((Unknown::Pin(s.node, 1), Point::new(0.0, 1.0)));
            }
            SupportKind::Roller => {
                let a = s.roll_angle_deg?.to_radians();
                t.push((Unknown::Roller(s.node), Point::new(-a.sin(), a.cos())));
            }
        }
    }
    for l in &model.loads {
        let d = l.direction_deg.to_radians();
        *applied.get_mut(&l.node)? = applied[&l.node] + Point::new(d.cos(), d.sin()) * l.magnitude_kn?;
    }

    let mut known: BTreeMap<Unknown, f64> = BTreeMap::new();
    let mut done: Vec<usize> = Vec::new();
    while done.len() < pos.len() {
        let mut progressed = false;
        for (&id, t) in &terms {
            if done.contains(&id) {
                continue;
            }
            let open: Vec<(Unknown, Point)> = t.iter().copied().filter(|(u, _)| !known.contains_key(u)).collect();
            if open.len() > 2 {
                continue;
            }
            // Sum of open terms must balance everything already known.
            let mut rhs = applied[&id] * -1.0;
            for (u, c) in t {
                if let Some(v) = known.get(u) {
                    rhs = rhs - *c * *v;
                }
            }
            match open.as_slice() {
                [] => {}
                [(u, c)] => {
                    known.insert(*u, c.dot(rhs) / c.dot(*c));
                }
                [(u1, c1), (u2, c2)] => {
                    let det = c1.cross(*c2);
                    if det.abs() < 1e-12 {
                        continue;
                    }
                    known.insert(*u1, rhs.cross(*c2) / det);
                    known.insert(*u2, c1.cross(rhs) / det);
                }
                _ => unreachable!(),
            }
            done.push(id);
            progressed = true;
            break;
        }
        if !progressed {
            return None;
        }
    }

    let mut axial = BTreeMap::new();
    let mut reactions: BTreeMap<usize, [f64; 2]> = BTreeMap::new();
    for (u, v) in known {
        match u {
            Unknown::Member(id) => {
                axial.insert(id, v);
            }
            Unknown::Pin(node, k) => reactions.entry(node).or_insert([0.0; 2])[k as usize] = v,
            Unknown::Roller(node) => {
                let s = model.supports.iter().find(|s| s.node == node)?;
                let a = s.roll_angle_deg?.to_radians();
                reactions.insert(node, [-a.sin() * v, a.cos() * v]);
            }
        }
    }
    Some((axial, reactions))
}

/// Symmetric A-frame: apex load `p` straight down, pin on the left, level
/// roller on the right, 2 m span and 1 m rise.
pub fn a_frame(p: f64) -> TrussModel {
    let node =
        |id, x: f64, y: f64| Node { id, pos_px: Point::new(x * 100.0, -y * 100.0), pos_m: Some(Point::new(x, y)) };
    let member = |id, a, b| MemberSpec { id, node_a: a, node_b: b, name: None, ea: 1.0 };
    TrussModel {
        nodes: vec![node(1, 0.0, 0.0), node(2, 2.0, 0.0), node(3, 1.0, 1.0)],
        members: vec![member(1, 1, 2), member(2, 1, 3), member(3, 2, 3)],
        supports: vec![
            SupportSpec { node: 1, kind: SupportKind::Pinned, roll_angle_deg: None },
            SupportSpec { node: 2, kind: SupportKind::Roller, roll_angle_deg: Some(0.0) },
        ],
        loads: vec![LoadSpec { node: 3, magnitude_kn: Some(p), direction_deg: 270.0 }],
        scale_m_per_px: Some(0.01),
    }
}

/// Largest absolute difference between two force maps over the union of keys.
pub fn max_abs_diff(a: &BTreeMap<usize, f64>, b: &BTreeMap<usize, f64>) -> f64 {
    a.keys()
        .chain(b.keys())
        .map(|k| (a.get(k).copied().unwrap_or(f64::NAN) - b.get(k).copied().unwrap_or(f64::NAN)).abs())
        .fold(0.0, |m, d| if d.is_nan() { f64::INFINITY } else { m.max(d) })
}

pub fn max_abs(a: &BTreeMap<usize, f64>) -> f64 {
    a.values().fold(0.0, |m, v| m.max(v.abs()))
}
