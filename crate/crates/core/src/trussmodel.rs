//! The truss model assembled from a parsed sketch: validation, user
//! corrections, scale calibration and the versioned JSON document.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::geometry::{wrap_deg_180, wrap_deg_360, Point};
use crate::segmenter::{ArrowSeg, Joint, MemberSeg, SupportKind, SupportSeg};
use crate::solver::{classify_determinacy, Determinacy, SolveResult};
use crate::textreader::{Attachment, LabelValue, RecognizedLabel};

pub const SCHEMA: &str = "trussketch-model/1";

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: usize,
    /// Image position, y down.
    pub pos_px: Point,
    /// Model position in metres, y up; set by calibration.
    pub pos_m: Option<Point>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemberSpec {
    pub id: usize,
    pub node_a: usize,
    pub node_b: usize,
    pub name: Option<String>,
    /// Axial rigidity in kN.
    pub ea: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportSpec {
    pub node: usize,
    pub kind: SupportKind,
    /// Free (rolling) direction for rollers, degrees in `[0, 180)`, y up.
    pub roll_angle_deg: Option<f64>,
}

impl SupportSpec {
    /// Number of reaction components.
    pub fn restraints(&self) -> usize {
        match self.kind {
            SupportKind::Pinned => 2,
            SupportKind::Roller => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadSpec {
    pub node: usize,
    /// kN; absent until a label or correction supplies it.
    pub magnitude_kn: Option<f64>,
    /// Degrees in `[0, 360)`, counter-clockwise from +x, y up.
    pub direction_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrussModel {
    pub nodes: Vec<Node>,
    pub members: Vec<MemberSpec>,
    pub supports: Vec<SupportSpec>,
    pub loads: Vec<LoadSpec>,
    pub scale_m_per_px: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub severity: Severity,
    pub code: String,
    /// Component reference such as `load:1`, `node:3` or `model`.
    pub subject: String,
    pub message: String,
}

impl ValidationIssue {
    pub fn error(code: &str, subject: impl Into<String>, message: impl Into<String>) -> Self {
        Self { severity: Severity::Error, code: code.into(), subject: subject.into(), message: message.into() }
    }

    pub fn warning(code: &str, subject: impl Into<String>, message: impl Into<String>) -> Self {
        Self { severity: Severity::Warning, code: code.into(), subject: subject.into(), message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// A corrections-file directive that would address the issue.
    pub fn remedy(&self) -> String {
        let s = &self.subject;
        match self.code.as_str() {
            "missing load magnitude" | "unparseable load magnitude" | "invalid load magnitude" => {
                format!(r#"{{"op": "set", "target": "{s}.magnitude", "value": <kN>}}"#)
            }
            "missing scale" => r#"{"op": "scale_ref", "target": "I,J", "value": <metres>} or --scale I,J=M"#.into(),
            "no supports" | "insufficient supports" | "mechanism" | "orphan support" => {
                r#"{"op": "add", "target": "support:<node>", "value": {"kind": "pinned"}}"#.into()
            }
            "duplicate support" => format!(r#"{{"op": "delete", "target": "{s}"}}"#),
            "dangling member" | "zero-length member" | "duplicate member" => {
                format!(r#"{{"op": "delete", "target": "{s}"}}"#)
            }
            "dangling load" => format!(r#"{{"op": "set", "target": "{s}.node", "value": <node>}}"#),
            "missing roll angle" => format!(r#"{{"op": "set", "target": "{s}.roll_angle", "value": <deg>}}"#),
            "isolated node" => r#"{"op": "add", "target": "member:A,B"}"#.into(),
            _ => "review the sketch; no single directive applies".into(),
        }
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {} [{}]: {}", self.code, self.subject, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("no such node {0}")]
    UnknownNode(usize),
    #[error("zero-length reference")]
    ZeroLengthReference,
    #[error("reference distance must be positive and finite")]
    InvalidDistance,
    #[error("invalid scale flag {0:?}, expected I,J=METERS")]
    BadScaleFlag(String),
    #[error("invalid model document: {0}")]
    Document(String),
}

/// A corrections directive failed; `index` is 1-based in file order.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("directive {index}: {message}")]
pub struct CorrectionError {
    pub index: usize,
    pub message: String,
}

impl TrussModel {
    pub fn node(&self, id: usize) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn member_by_pair(&self, a: usize, b: usize) -> Option<&MemberSpec> {
        let (a, b) = (a.min(b), a.max(b));
        self.members.iter().find(|m| (m.node_a.min(m.node_b), m.node_a.max(m.node_b)) == (a, b))
    }

    /// Sort members by node pair and renumber them densely from 1.
    pub fn renumber_members(&mut self) {
        for m in &mut self.members {
            if m.node_a > m.node_b {
                std::mem::swap(&mut m.node_a, &mut m.node_b);
            }
        }
        self.members.sort_by_key(|x| (x.node_a, x.node_b, x.id));
        for (i, m) in self.members.iter_mut().enumerate() {
            m.id = i + 1;
        }
    }

    /// Distance in metres between two calibrated nodes.
    pub fn distance_m(&self, i: usize, j: usize) -> Result<f64, ModelError> {
        let a = self.node(i).ok_or(ModelError::UnknownNode(i))?;
        let b = self.node(j).ok_or(ModelError::UnknownNode(j))?;
        match (a.pos_m, b.pos_m) {
            (Some(p), Some(q)) => Ok(p.distance(q)),
            _ => Err(ModelError::InvalidDistance),
        }
    }

    /// Reaction components: 2 per pinned support, 1 per roller.
    pub fn restraint_count(&self) -> usize {
        self.supports.iter().map(SupportSpec::restraints).sum()
    }
}

/// Assemble the model from segmentation results and snapped labels. Image y
/// is flipped so that model angles are counter-clockwise with y up.
pub fn build_model(
    joints: &[Joint],
    members: &[MemberSeg],
    supports: &[SupportSeg],
    arrows: &[ArrowSeg],
    labels: &[RecognizedLabel],
) -> TrussModel {
    let nodes = joints.iter().map(|j| Node { id: j.id, pos_px: j.center, pos_m: None }).collect();
    let mut model = TrussModel {
        nodes,
        members: members
            .iter()
            .map(|m| {
                let name = labels.iter().find_map(|l| match (&l.attached_to, &l.parsed) {
                    (Attachment::Member(id), LabelValue::Name(n)) if *id == m.id => Some(n.clone()),
                    _ => None,
                });
                MemberSpec { id: m.id, node_a: m.joint_a, node_b: m.joint_b, name, ea: 1.0 }
            })
            .collect(),
        supports: supports
            .iter()
            .map(|s| SupportSpec { node: s.apex_joint, kind: s.kind, roll_angle_deg: s.roll_angle_deg })
            .collect(),
        loads: arrows
            .iter()
            .map(|a| {
                let label = labels.iter().find_map(|l| match (&l.attached_to, &l.parsed) {
                    (Attachment::Arrow(id), LabelValue::Load { magnitude_kn, reversed, .. }) if *id == a.id => {
                        Some((*magnitude_kn, *reversed))
                    }
                    _ => None,
                });
                let (magnitude_kn, reversed) = match label {
                    Some((m, r)) => (Some(m), r),
                    None => (None, false),
                };
                let flip = if reversed { 180.0 } else { 0.0 };
                LoadSpec { node: a.target_joint, magnitude_kn, direction_deg: wrap_deg_360(a.orientation_deg + flip) }
            })
            .collect(),
        scale_m_per_px: None,
    };
    model.renumber_members();
    model
}

/// All problems that block (errors) or qualify (warnings) a solve.
pub fn validate(model: &TrussModel) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    if model.nodes.is_empty() {
        issues.push(ValidationIssue::error("no nodes", "model", "the model has no nodes"));
    }
    let ids: BTreeSet<usize> = model.nodes.iter().map(|n| n.id).collect();

    let mut pairs = BTreeSet::new();
    for m in &model.members {
        let subject = format!("member:{},{}", m.node_a, m.node_b);
        if !ids.contains(&m.node_a) || !ids.contains(&m.node_b) {
            issues.push(ValidationIssue::error("dangling member", &subject, "member references a missing node"));
            continue;
        }
        if m.node_a == m.node_b {
            issues.push(ValidationIssue::error("zero-length member", &subject, "member joins a node to itself"));
            continue;
        }
        if !pairs.insert((m.node_a.min(m.node_b), m.node_a.max(m.node_b))) {
            issues.push(ValidationIssue::error("duplicate member", &subject, "node pair appears twice"));
        }
        let (a, b) = (model.node(m.node_a).unwrap(), model.node(m.node_b).unwrap());
        if a.pos_px.distance(b.pos_px) == 0.0 {
            issues.push(ValidationIssue::error("zero-length member", &subject, "member end nodes coincide"));
        }
        if !(m.ea > 0.0 && m.ea.is_finite()) {
            issues.push(ValidationIssue::error("invalid EA", &subject, "EA must be positive"));
        }
    }

    for (k, l) in model.loads.iter().enumerate() {
        let subject = format!("load:{}", k + 1);
        if !ids.contains(&l.node) {
            issues.push(ValidationIssue::error(
                "dangling load",
                &subject,
                format!("load targets missing node {}", l.node),
            ));
        }
        match l.magnitude_kn {
            None => issues.push(ValidationIssue::error(
                "missing load magnitude",
                &subject,
                format!("load on node {} has no magnitude", l.node),
            )),
            Some(v) if !(v >= 0.0 && v.is_finite()) => {
                issues.push(ValidationIssue::error("invalid load magnitude", &subject, "magnitude must be >= 0"))
            }
            _ => {}
        }
    }

    let mut supported = BTreeSet::new();
    for s in &model.supports {
        let subject = format!("support:{}", s.node);
        if !ids.contains(&s.node) {
            issues.push(ValidationIssue::error("dangling support", &subject, "support on a missing node"));
        }
        if !supported.insert(s.node) {
            issues.push(ValidationIssue::error("duplicate support", &subject, "node has more than one support"));
        }
        if s.kind == SupportKind::Roller && s.roll_angle_deg.is_none() {
            issues.push(ValidationIssue::error("missing roll angle", &subject, "roller has no rolling direction"));
        }
    }

    let r = model.restraint_count();
    if !model.nodes.is_empty() {
        if model.supports.is_empty() {
            issues.push(ValidationIssue::error("no supports", "model", "the truss has no supports"));
        } else if r < 3 {
            issues.push(ValidationIssue::error(
                "insufficient supports",
                "model",
                format!("{r} reaction components; at least 3 are needed"),
            ));
        } else {
            match classify_determinacy(model) {
                Determinacy::Mechanism(d) => {
                    issues.push(ValidationIssue::error("mechanism", "model", format!("m + r is {d} short of 2j")))
                }
                Determinacy::Indeterminate(d) => issues.push(ValidationIssue::warning(
                    "indeterminate",
                    "model",
                    format!("statically indeterminate of degree {d}; forces assume uniform EA"),
                )),
                Determinacy::Determinate => {}
            }
        }
    }

    if model.scale_m_per_px.is_none() {
        issues.push(ValidationIssue::error("missing scale", "model", "no reference distance given"));
    }

    for n in &model.nodes {
        if !model.members.iter().any(|m| m.node_a == n.id || m.node_b == n.id) {
            issues.push(ValidationIssue::warning("isolated node", format!("node:{}", n.id), "node has no members"));
        }
    }
    issues
}

/// Set `scale_m_per_px` from a known distance and recompute metre positions.
pub fn calibrate_scale(model: &TrussModel, i: usize, j: usize, distance_m: f64) -> Result<TrussModel, ModelError> {
    if !(distance_m > 0.0 && distance_m.is_finite()) {
        return Err(ModelError::InvalidDistance);
    }
    let a = model.node(i).ok_or(ModelError::UnknownNode(i))?;
    let b = model.node(j).ok_or(ModelError::UnknownNode(j))?;
    let px = a.pos_px.distance(b.pos_px);
    if i == j || px == 0.0 {
        return Err(ModelError::ZeroLengthReference);
    }
    let mut out = model.clone();
    out.set_scale(distance_m / px);
    Ok(out)
}

impl TrussModel {
    /// Apply a scale and derive every metre position from the pixel one.
    pub fn set_scale(&mut self, scale: f64) {
        self.scale_m_per_px = Some(scale);
        for n in &mut self.nodes {
            n.pos_m = Some(Point::new(n.pos_px.x * scale, -n.pos_px.y * scale));
        }
    }
}

/// Parse the `I,J=METERS` scale flag.
pub fn parse_scale_flag(s: &str) -> Result<(usize, usize, f64), ModelError> {
    let bad = || ModelError::BadScaleFlag(s.to_string());
    let (pair, dist) = s.split_once('=').ok_or_else(bad)?;
    let (i, j) = parse_pair(pair).ok_or_else(bad)?;
    let d: f64 = dist.trim().parse().map_err(|_| bad())?;
    Ok((i, j, d))
}

fn parse_pair(s: &str) -> Option<(usize, usize)> {
    let (a, b) = s.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

/// A declarative list of edits applied in order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Corrections {
    pub directives: Vec<Directive>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Directive {
    pub op: String,
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Value>,
}

impl Corrections {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Document(e.to_string()))
    }
}

pub fn apply_corrections(model: &TrussModel, corrections: &Corrections) -> Result<TrussModel, CorrectionError> {
    let mut out = model.clone();
    for (k, d) in corrections.directives.iter().enumerate() {
        apply_directive(&mut out, d).map_err(|message| CorrectionError { index: k + 1, message })?;
        out.renumber_members();
    }
    Ok(out)
}

fn num(value: &Option<Value>) -> Result<f64, String> {
    value.as_ref().and_then(Value::as_f64).ok_or_else(|| "value must be a number".to_string())
}

fn node_ref(model: &TrussModel, id: &str) -> Result<usize, String> {
    let n: usize = id.trim().parse().map_err(|_| format!("bad node id {id:?}"))?;
    model.node(n).map(|_| n).ok_or_else(|| format!("no such node {n}"))
}

fn parse_kind(v: &Value) -> Result<SupportKind, String> {
    serde_json::from_value(v.clone()).map_err(|_| "kind must be \"pinned\" or \"roller\"".to_string())
}

fn apply_directive(model: &mut TrussModel, d: &Directive) -> Result<(), String> {
    if d.op == "scale_ref" {
        let (i, j) = parse_pair(&d.target).ok_or("scale_ref target must be \"I,J\"")?;
        let dist = num(&d.value)?;
        *model = calibrate_scale(model, i, j, dist).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let (kind, rest) = d.target.split_once(':').ok_or("target must look like kind:id[.field]")?;
    let (id, field) = match rest.split_once('.') {
        Some((id, f)) => (id, Some(f)),
        None => (rest, None),
    };
    match (d.op.as_str(), kind, field) {
        ("set", "load", Some(f)) => {
            let k = load_index(model, id)?;
            match f {
                "magnitude" => {
                    let v = num(&d.value)?;
                    if v < 0.0 {
                        model.loads[k].magnitude_kn = Some(-v);
                        model.loads[k].direction_deg = wrap_deg_360(model.loads[k].direction_deg + 180.0);
                    } else {
                        model.loads[k].magnitude_kn = Some(v);
                    }
                }
                "direction" => model.loads[k].direction_deg = wrap_deg_360(num(&d.value)?),
                "node" => {
                    let n = num(&d.value)?;
                    model.loads[k].node = node_ref(model, &format!("{n}"))?;
                }
                _ => return Err(format!("unknown load field {f:?}")),
            }
        }
        ("delete", "load", None) => {
            let k = load_index(model, id)?;
            model.loads.remove(k);
        }
        ("add", "load", None) => {
            let node = node_ref(model, id)?;
            let v = d.value.as_ref().ok_or("add load needs a value")?;
            let magnitude_kn = v.get("magnitude_kN").and_then(Value::as_f64);
            let direction_deg = v.get("direction_deg").and_then(Value::as_f64).ok_or("missing direction_deg")?;
            model.loads.push(LoadSpec { node, magnitude_kn, direction_deg: wrap_deg_360(direction_deg) });
        }
        ("set", "support", Some(f)) => {
            let node = node_ref(model, id)?;
            let s = model.supports.iter_mut().find(|s| s.node == node).ok_or("no such support")?;
            match f {
                "kind" => {
                    s.kind = parse_kind(d.value.as_ref().ok_or("value required")?)?;
                    match s.kind {
                        SupportKind::Pinned => s.roll_angle_deg = None,
                        SupportKind::Roller => s.roll_angle_deg = Some(s.roll_angle_deg.unwrap_or(0.0)),
                    }
                }
                "roll_angle" => {
                    if s.kind != SupportKind::Roller {
                        return Err("only rollers have a roll angle".into());
                    }
                    s.roll_angle_deg = Some(wrap_deg_180(num(&d.value)?));
                }
                _ => return Err(format!("unknown support field {f:?}")),
            }
        }
        ("delete", "support", None) => {
            let node = node_ref(model, id)?;
            let k = model.supports.iter().position(|s| s.node == node).ok_or("no such support")?;
            model.supports.remove(k);
        }
        ("add", "support", None) => {
            let node = node_ref(model, id)?;
            let v = d.value.as_ref().ok_or("add support needs a value")?;
            let kind = parse_kind(v.get("kind").ok_or("missing kind")?)?;
            let roll = match kind {
                SupportKind::Pinned => None,
                SupportKind::Roller => {
                    Some(wrap_deg_180(v.get("roll_angle_deg").and_then(Value::as_f64).unwrap_or(0.0)))
                }
            };
            model.supports.push(SupportSpec { node, kind, roll_angle_deg: roll });
        }
        (op, "member", f) => {
            let (a, b) = parse_pair(id).ok_or("member target must be member:A,B")?;
            let (a, b) = (node_ref(model, &a.to_string())?, node_ref(model, &b.to_string())?);
            let pos = model
                .members
                .iter()
                .position(|m| (m.node_a.min(m.node_b), m.node_a.max(m.node_b)) == (a.min(b), a.max(b)));
            match (op, f) {
                ("delete", None) => {
                    model.members.remove(pos.ok_or("no such member")?);
                }
                ("add", None) => {
                    if pos.is_some() {
                        return Err("member already exists".into());
                    }
                    if a == b {
                        return Err("member must join two nodes".into());
                    }
                    model.members.push(MemberSpec { id: 0, node_a: a.min(b), node_b: a.max(b), name: None, ea: 1.0 });
                }
                ("set", Some("name")) => {
                    let name = d.value.as_ref().and_then(Value::as_str).ok_or("name must be a string")?;
                    model.members[pos.ok_or("no such member")?].name = Some(name.to_string());
                }
                ("set", Some("EA")) => {
                    let v = num(&d.value)?;
                    if v <= 0.0 {
                        return Err("EA must be positive".into());
                    }
                    model.members[pos.ok_or("no such member")?].ea = v;
                }
                _ => return Err(format!("unsupported member directive {op:?}")),
            }
        }
        (op, kind, _) => return Err(format!("unsupported directive {op:?} on {kind:?}")),
    }
    Ok(())
}

fn load_index(model: &TrussModel, id: &str) -> Result<usize, String> {
    let k: usize = id.trim().parse().map_err(|_| format!("bad load id {id:?}"))?;
    if k == 0 || k > model.loads.len() {
        return Err("no such load".into());
    }
    Ok(k - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct NodeDoc {
    id: usize,
    px: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MemberDoc {
    id: usize,
    a: usize,
    b: usize,
    name: Option<String>,
    #[serde(rename = "EA")]
    ea: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SupportDoc {
    node: usize,
    kind: SupportKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    roll_angle_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LoadDoc {
    node: usize,
    #[serde(rename = "magnitude_kN")]
    magnitude_kn: Option<f64>,
    direction_deg: f64,
}

/// The on-disk model, optionally with solver results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelDoc {
    schema: String,
    nodes: Vec<NodeDoc>,
    members: Vec<MemberDoc>,
    supports: Vec<SupportDoc>,
    loads: Vec<LoadDoc>,
    scale_m_per_px: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    results: Option<SolveResult>,
}

/// Serialize the model (and results when given) as pretty JSON ending in a
/// newline. Maps are keyed by numeric id in ascending order.
pub fn to_json(model: &TrussModel, results: Option<&SolveResult>) -> String {
    let doc = ModelDoc {
        schema: SCHEMA.to_string(),
        nodes: model
            .nodes
            .iter()
            .map(|n| NodeDoc { id: n.id, px: [n.pos_px.x, n.pos_px.y], m: n.pos_m.map(|p| [p.x, p.y]) })
            .collect(),
        members: model
            .members
            .iter()
            .map(|m| MemberDoc { id: m.id, a: m.node_a, b: m.node_b, name: m.name.clone(), ea: m.ea })
            .collect(),
        supports: model
            .supports
            .iter()
            .map(|s| SupportDoc { node: s.node, kind: s.kind, roll_angle_deg: s.roll_angle_deg })
            .collect(),
        loads: model
            .loads
            .iter()
            .map(|l| LoadDoc { node: l.node, magnitude_kn: l.magnitude_kn, direction_deg: l.direction_deg })
            .collect(),
        scale_m_per_px: model.scale_m_per_px,
        results: results.cloned(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("model serializes");
    s.push('\n');
    s
}

/// Parse a model document; embedded results are returned when present.
pub fn from_json(text: &str) -> Result<(TrussModel, Option<SolveResult>), ModelError> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| ModelError::Document(e.to_string()))?;
    if doc.schema != SCHEMA {
        return Err(ModelError::Document(format!("unsupported schema {:?}", doc.schema)));
    }
    let model = TrussModel {
        nodes: doc
            .nodes
            .iter()
            .map(|n| Node {
                id: n.id,
                pos_px: Point::new(n.px[0], n.px[1]),
                pos_m: n.m.map(|m| Point::new(m[0], m[1])),
            })
            .collect(),
        members: doc
            .members
            .iter()
            .map(|m| MemberSpec { id: m.id, node_a: m.a, node_b: m.b, name: m.name.clone(), ea: m.ea })
            .collect(),
        supports: doc
            .supports
            .iter()
            .map(|s| SupportSpec { node: s.node, kind: s.kind, roll_angle_deg: s.roll_angle_deg })
            .collect(),
        loads: doc
            .loads
            .iter()
            .map(|l| LoadSpec { node: l.node, magnitude_kn: l.magnitude_kn, direction_deg: l.direction_deg })
            .collect(),
        scale_m_per_px: doc.scale_m_per_px,
    };
    Ok((model, doc.results))
}

/// Issues as a JSON array, pretty printed with a trailing newline.
pub fn issues_to_json(issues: &[ValidationIssue]) -> String {
    let entries: Vec<BTreeMap<&str, Value>> = issues
        .iter()
        .map(|i| {
            BTreeMap::from([
                ("severity", serde_json::to_value(i.severity).expect("enum")),
                ("code", Value::from(i.code.clone())),
                ("subject", Value::from(i.subject.clone())),
                ("message", Value::from(i.message.clone())),
                ("remedy", Value::from(i.remedy())),
            ])
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&entries).expect("issues serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Triangle with a pin at 1, a roller at 2 and one load on 3.
    pub(crate) fn triangle() -> TrussModel {
        let p = [(100.0, 300.0), (300.0, 300.0), (200.0, 200.0)];
        let mut m = TrussModel {
            nodes: p
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| Node { id: i + 1, pos_px: Point::new(x, y), pos_m: None })
                .collect(),
            members: [(1, 2), (1, 3), (2, 3)]
                .iter()
                .map(|&(a, b)| MemberSpec { id: 0, node_a: a, node_b: b, name: None, ea: 1.0 })
                .collect(),
            supports: vec![
                SupportSpec { node: 1, kind: SupportKind::Pinned, roll_angle_deg: None },
                SupportSpec { node: 2, kind: SupportKind::Roller, roll_angle_deg: Some(0.0) },
            ],
            loads: vec![LoadSpec { node: 3, magnitude_kn: Some(10.0), direction_deg: 270.0 }],
            scale_m_per_px: None,
        };
        m.renumber_members();
        m.set_scale(0.01);
        m
    }

    fn codes(issues: &[ValidationIssue]) -> Vec<&str> {
        issues.iter().map(|i| i.code.as_str()).collect()
    }

    #[test]
    fn valid_model_has_no_issues() {
        assert!(validate(&triangle()).is_empty());
    }

    #[test]
    fn unlabeled_load_is_an_error() {
        let mut m = triangle();
        m.loads[0].magnitude_kn = None;
        assert_eq!(codes(&validate(&m)), vec!["missing load magnitude"]);
    }

    #[test]
    fn one_roller_is_insufficient() {
        let mut m = triangle();
        m.supports.remove(0);
        assert_eq!(codes(&validate(&m)), vec!["insufficient supports"]);
        m.supports.clear();
        assert_eq!(codes(&validate(&m)), vec!["no supports"]);
    }

    #[test]
    fn other_validation_rules() {
        let mut m = triangle();
        m.scale_m_per_px = None;
        m.supports.push(SupportSpec { node: 1, kind: SupportKind::Roller, roll_angle_deg: Some(0.0) });
        m.members.push(MemberSpec { id: 9, node_a: 3, node_b: 7, name: None, ea: 1.0 });
        m.nodes.push(Node { id: 4, pos_px: Point::new(5.0, 5.0), pos_m: None });
        let issues = validate(&m);
        let c = codes(&issues);
        for want in ["duplicate support", "dangling member", "missing scale", "isolated node"] {
            assert!(c.contains(&want), "{want} missing from {c:?}");
        }
        assert!(validate(&TrussModel::default()).iter().any(|i| i.code == "no nodes"));
    }

    #[test]
    fn corrections_set_load_and_clear_issue() {
        let mut m = triangle();
        m.loads[0].magnitude_kn = None;
        let c = Corrections::from_json(r#"{"directives": [{"op": "set", "target": "load:1.magnitude", "value": 10}]}"#)
            .unwrap();
        let fixed = apply_corrections(&m, &c).unwrap();
        assert_eq!(fixed.loads[0].magnitude_kn, Some(10.0));
        assert!(validate(&fixed).is_empty());
    }

    #[test]
    fn delete_then_add_member_is_identity() {
        let m = triangle();
        let c = Corrections::from_json(
            r#"{"directives": [{"op": "delete", "target": "member:2,3"}, {"op": "add", "target": "member:3,2"}]}"#,
        )
        .unwrap();
        assert_eq!(apply_corrections(&m, &c).unwrap(), m);
    }

    #[test]
    fn missing_load_directive_is_named() {
        let c = Corrections::from_json(r#"{"directives": [{"op": "set", "target": "load:99.magnitude", "value": 1}]}"#)
            .unwrap();
        let err = apply_corrections(&triangle(), &c).unwrap_err();
        assert_eq!(err.to_string(), "directive 1: no such load");
    }

    #[test]
    fn support_and_scale_directives() {
        let c = Corrections::from_json(
            r#"{"directives": [
                {"op": "set", "target": "support:2.kind", "value": "pinned"},
                {"op": "scale_ref", "target": "1,2", "value": 4.0}
            ]}"#,
        )
        .unwrap();
        let m = apply_corrections(&triangle(), &c).unwrap();
        assert_eq!(m.supports[1].kind, SupportKind::Pinned);
        assert_eq!(m.supports[1].roll_angle_deg, None);
        assert!((m.scale_m_per_px.unwrap() - 0.02).abs() < 1e-15);
    }

    #[test]
    fn calibration() {
        let m = calibrate_scale(&triangle(), 1, 2, 4.0).unwrap();
        assert!((m.scale_m_per_px.unwrap() - 0.02).abs() < 1e-15);
        assert!((m.distance_m(1, 2).unwrap() - 4.0).abs() < 1e-12);
        // y flips: node 3 is above node 1 in the image, so higher in metres.
        assert!(m.node(3).unwrap().pos_m.unwrap().y > m.node(1).unwrap().pos_m.unwrap().y);
        assert_eq!(calibrate_scale(&m, 1, 1, 4.0), Err(ModelError::ZeroLengthReference));
        assert_eq!(calibrate_scale(&m, 1, 2, 0.0), Err(ModelError::InvalidDistance));
        assert_eq!(calibrate_scale(&m, 1, 8, 1.0), Err(ModelError::UnknownNode(8)));
    }

    #[test]
    fn scale_flag_syntax() {
        assert_eq!(parse_scale_flag("1,2=4.0").unwrap(), (1, 2, 4.0));
        assert!(parse_scale_flag("1-2=4").is_err());
        assert!(parse_scale_flag("1,2").is_err());
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let mut m = triangle();
        m.members[0].name = Some("AB".into());
        m.loads.push(LoadSpec { node: 2, magnitude_kn: None, direction_deg: 12.5 });
        let a = to_json(&m, None);
        let (back, results) = from_json(&a).unwrap();
        assert_eq!(back, m);
        assert!(results.is_none());
        assert_eq!(to_json(&back, None), a);
        assert!(a.contains("\"schema\": \"trussketch-model/1\""));
        assert!(from_json(&a.replace("model/1", "model/2")).is_err());
    }
}
