//! Linear static analysis of planar pin-jointed trusses by the direct
//! stiffness method. Forces are in kN, lengths in metres, tension positive.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;
use crate::segmenter::SupportKind;
use crate::trussmodel::TrussModel;

const PIVOT_TOLERANCE: f64 = 1e-10;
const REFINEMENT_STEPS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Determinacy {
    Determinate,
    Indeterminate(usize),
    Mechanism(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("zero-length member {0}")]
    ZeroLengthMember(usize),
    #[error("member {0} references a missing node")]
    DanglingMember(usize),
    #[error("node {0} has no calibrated position")]
    Uncalibrated(usize),
    #[error("load on node {0} has no magnitude")]
    MissingMagnitude(usize),
    #[error("mechanism of degree {0}")]
    Mechanism(usize),
    #[error("unstable geometry")]
    UnstableGeometry,
}

/// Assembled global system in the per-node constraint frames.
#[derive(Debug, Clone, PartialEq)]
pub struct StiffnessSystem {
    /// Node ids in DOF order; node `node_ids[i]` owns DOFs `2i` and `2i + 1`.
    pub node_ids: Vec<usize>,
    /// Dense symmetric stiffness, row-major, `2j x 2j`, kN/m.
    pub k: Vec<f64>,
    /// Load vector in kN.
    pub f: Vec<f64>,
    /// Frame rotation per node in degrees. A roller's local x runs along its
    /// rolling direction and local y along the constrained normal.
    pub frames: Vec<f64>,
    /// Constrained DOF indices, expressed in the node frames.
    pub constrained: BTreeSet<usize>,
}

impl StiffnessSystem {
    pub fn dofs(&self) -> usize {
        self.f.len()
    }

    pub fn k_at(&self, r: usize, c: usize) -> f64 {
        self.k[r * self.dofs() + c]
    }

    /// Largest `|K - K^T|` entry.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dofs();
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r + 1..n {
                worst = worst.max((self.k_at(r, c) - self.k_at(c, r)).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveResult {
    /// Member axial force by member id, kN, tension positive.
    #[serde(rename = "axial_kN")]
    pub axial_kn: BTreeMap<usize, f64>,
    /// Global reaction components (Rx, Ry) by supported node id, kN.
    pub reactions: BTreeMap<usize, [f64; 2]>,
    /// Global displacement (ux, uy) by node id, metres.
    pub displacements_m: BTreeMap<usize, [f64; 2]>,
}

pub fn classify_determinacy(model: &TrussModel) -> Determinacy {
    let lhs = model.members.len() + model.restraint_count();
    let rhs = 2 * model.nodes.len();
    match lhs.cmp(&rhs) {
        std::cmp::Ordering::Equal => Determinacy::Determinate,
        std::cmp::Ordering::Greater => Determinacy::Indeterminate(lhs - rhs),
        std::cmp::Ordering::Less => Determinacy::Mechanism(rhs - lhs),
    }
}

fn positions(model: &TrussModel) -> Result<BTreeMap<usize, Point>, SolveError> {
    model.nodes.iter().map(|n| n.pos_m.map(|p| (n.id, p)).ok_or(SolveError::Uncalibrated(n.id))).collect()
}

fn rotate(v: [f64; 2], deg: f64) -> [f64; 2] {
    let (s, c) = deg.to_radians().sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

pub fn assemble(model: &TrussModel) -> Result<StiffnessSystem, SolveError> {
    let pos = positions(model)?;
    let node_ids: Vec<usize> = pos.keys().copied().collect();
    let index: BTreeMap<usize, usize> = node_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let n = 2 * node_ids.len();
    let mut k = vec![0.0; n * n];
    let mut f = vec![0.0; n];

    for m in &model.members {
        let (ia, ib) = match (index.get(&m.node_a), index.get(&m.node_b)) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(SolveError::DanglingMember(m.id)),
        };
        let d = pos[&m.node_b] - pos[&m.node_a];
        let len = d.norm();
        if len == 0.0 || ia == ib {
            return Err(SolveError::ZeroLengthMember(m.id));
        }
        let dc = [d.x / len, d.y / len];
        let kk = m.ea / len;
        let dofs = [2 * ia, 2 * ia + 1, 2 * ib, 2 * ib + 1];
        let sign = [1.0, 1.0, -1.0, -1.0];
        for p in 0..4 {
            for q in 0..4 {
                k[dofs[p] * n + dofs[q]] += kk * sign[p] * sign[q] * dc[p % 2] * dc[q % 2];
            }
        }
    }

    for l in &model.loads {
        let i = *index.get(&l.node).ok_or(SolveError::DanglingMember(0))?;
        let p = l.magnitude_kn.ok_or(SolveError::MissingMagnitude(l.node))?;
        let (s, c) = l.direction_deg.to_radians().sin_cos();
        f[2 * i] += p * c;
        f[2 * i + 1] += p * s;
    }

    let mut frames = vec![0.0; node_ids.len()];
    let mut constrained = BTreeSet::new();
    for s in &model.supports {
        let Some(&i) = index.get(&s.node) else { continue };
        match s.kind {
            SupportKind::Pinned => {
                constrained.insert(2 * i);
                constrained.insert(2 * i + 1);
            }
            SupportKind::Roller => {
                frames[i] = s.roll_angle_deg.unwrap_or(0.0);
                constrained.insert(2 * i + 1);
            }
        }
    }

    // Rotate roller nodes: K' = T^T K T, F' = T^T F with T block diagonal.
    for (i, &angle) in frames.iter().enumerate() {
        if angle == 0.0 {
            continue;
        }
        let (s, c) = angle.to_radians().sin_cos();
        let (a, b) = (2 * i, 2 * i + 1);
        for r in 0..n {
            let (x, y) = (k[r * n + a], k[r * n + b]);
            k[r * n + a] = c * x + s * y;
            k[r * n + b] = -s * x + c * y;
        }
        for col in 0..n {
            let (x, y) = (k[a * n + col], k[b * n + col]);
            k[a * n + col] = c * x + s * y;
            k[b * n + col] = -s * x + c * y;
        }
        let (x, y) = (f[a], f[b]);
        f[a] = c * x + s * y;
        f[b] = -s * x + c * y;
    }

    Ok(StiffnessSystem { node_ids, k, f, frames, constrained })
}

/// Factor a symmetric positive definite matrix in place as LDL^T (unit lower
/// L below the diagonal, D on it), rejecting pivots below `PIVOT_TOLERANCE`
/// times the largest diagonal entry.
fn ldlt_factor(mut a: Vec<f64>, n: usize) -> Result<Vec<f64>, SolveError> {
    let max_diag = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max);
    let tol = PIVOT_TOLERANCE * max_diag;
    for j in 0..n {
        let mut d = a[j * n + j];
        for p in 0..j {
            d -= a[j * n + p] * a[j * n + p] * a[p * n + p];
        }
        if !(d > tol) {
            return Err(SolveError::UnstableGeometry);
        }
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut v = a[i * n + j];
            for p in 0..j {
                v -= a[i * n + p] * a[j * n + p] * a[p * n + p];
            }
            a[i * n + j] = v / d;
        }
    }
    Ok(a)
}

fn ldlt_apply(f: &[f64], mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for i in 0..n {
        for p in 0..i {
            b[i] -= f[i * n + p] * b[p];
        }
    }
    for i in 0..n {
        b[i] /= f[i * n + i];
    }
    for i in (0..n).rev() {
        for p in i + 1..n {
            b[i] -= f[p * n + i] * b[p];
        }
    }
    b
}

/// Sum of products carried in twice the working precision (error-free
/// product and sum transformations), rounded once at the end.
fn dot2(terms: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for (a, b) in terms {
        let p = a * b;
        let pe = a.mul_add(b, -p);
        let t = s + p;
        let z = t - s;
        c += (s - (t - z)) + (p - z) + pe;
        s = t;
    }
    s + c
}

/// Solve `a x = b` by LDL^T followed by refinement steps whose residuals are
/// accumulated with [`dot2`].
fn ldlt_solve(a: Vec<f64>, b: Vec<f64>) -> Result<Vec<f64>, SolveError> {
    let n = b.len();
    let f = ldlt_factor(a.clone(), n)?;
    let mut x = ldlt_apply(&f, b.clone());
    for _ in 0..REFINEMENT_STEPS {
        let r: Vec<f64> = (0..n)
            .map(|i| dot2(std::iter::once((b[i], 1.0)).chain((0..n).map(|j| (-a[i * n + j], x[j])))))
            .collect();
        let dx = ldlt_apply(&f, r);
        x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
    }
    Ok(x)
}

pub fn solve(model: &TrussModel) -> Result<SolveResult, SolveError> {
    if let Determinacy::Mechanism(d) = classify_determinacy(model) {
        return Err(SolveError::Mechanism(d));
    }
    let sys = assemble(model)?;
    let n = sys.dofs();
    let free: Vec<usize> = (0..n).filter(|d| !sys.constrained.contains(d)).collect();

    let kff: Vec<f64> =
        free.iter().flat_map(|&r| free.iter().map(move |&c| (r, c))).map(|(r, c)| sys.k_at(r, c)).collect();
    let ff: Vec<f64> = free.iter().map(|&d| sys.f[d]).collect();
    let uf = if free.is_empty() { Vec::new() } else { ldlt_solve(kff, ff)? };

    let mut u_local = vec![0.0; n];
    for (&d, &v) in free.iter().zip(&uf) {
        u_local[d] = v;
    }

    let mut result = SolveResult::default();
    let mut u_global = BTreeMap::new();
    for (i, &id) in sys.node_ids.iter().enumerate() {
        let g = rotate([u_local[2 * i], u_local[2 * i + 1]], sys.frames[i]);
        u_global.insert(id, g);
        result.displacements_m.insert(id, g);
    }

    for s in &model.supports {
        let Some(i) = sys.node_ids.iter().position(|&id| id == s.node) else { continue };
        let mut r = [0.0; 2];
        for (c, slot) in r.iter_mut().enumerate() {
            let d = 2 * i + c;
            if sys.constrained.contains(&d) {
                *slot = (0..n).map(|q| sys.k_at(d, q) * u_local[q]).sum::<f64>() - sys.f[d];
            }
        }
        result.reactions.insert(s.node, rotate(r, sys.frames[i]));
    }

    let pos = positions(model)?;
    for m in &model.members {
        let d = pos[&m.node_b] - pos[&m.node_a];
        let len = d.norm();
        let (ua, ub) = (u_global[&m.node_a], u_global[&m.node_b]);
        let stretch = ((ub[0] - ua[0]) * d.x + (ub[1] - ua[1]) * d.y) / len;
        result.axial_kn.insert(m.id, m.ea / len * stretch);
    }
    Ok(result)
}

/// Largest nodal force imbalance, kN, over member forces, loads and reactions.
pub fn equilibrium_residual(model: &TrussModel, result: &SolveResult) -> f64 {
    let Ok(pos) = positions(model) else { return f64::INFINITY };
    let mut sum: BTreeMap<usize, [f64; 2]> = pos.keys().map(|&id| (id, [0.0; 2])).collect();
    let mut add = |id: usize, v: [f64; 2]| {
        if let Some(s) = sum.get_mut(&id) {
            s[0] += v[0];
            s[1] += v[1];
        }
    };
    for m in &model.members {
        let (Some(&a), Some(&b)) = (pos.get(&m.node_a), pos.get(&m.node_b)) else { continue };
        let Some(e) = (b - a).normalized() else { continue };
        let nf = result.axial_kn.get(&m.id).copied().unwrap_or(0.0);
        add(m.node_a, [nf * e.x, nf * e.y]);
        add(m.node_b, [-nf * e.x, -nf * e.y]);
    }
    for l in &model.loads {
        let p = l.magnitude_kn.unwrap_or(0.0);
        let (s, c) = l.direction_deg.to_radians().sin_cos();
        add(l.node, [p * c, p * s]);
    }
    for (&node, &r) in &result.reactions {
        add(node, r);
    }
    sum.values().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max)
}
