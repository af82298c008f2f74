//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion to stderr (uncaptured), then fails if any criterion failed.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trussketch::annotator::draw::text_pixels;
use trussketch::annotator::{generate_sketch, hazard_map, random_truss, SketchParams};
use trussketch::config::Config;
use trussketch::geometry::{angle_diff_deg, Point};
use trussketch::raster::{
    binarize, dilate, dilate_with_border, erode, remove_small_regions, save_gray_png, BinaryImage, StructuringElement,
    ThresholdPolicy,
};
use trussketch::segmenter::{segment, SupportKind};
use trussketch::solver::{equilibrium_residual, solve};
use trussketch::textreader::{group_words, read_word, slope_candidates, TemplateSet};
use trussketch::trussmodel::{from_json, TrussModel};
use trussketch_cli::{cmd_analyze, AnalyzeArgs};

use common::{a_frame, max_abs, max_abs_diff, method_of_joints};

type Outcome = Result<String, String>;

fn analyze_args(image: &Path, dir: &Path, scale: Option<&str>) -> AnalyzeArgs {
    AnalyzeArgs {
        image: image.to_path_buf(),
        out: Some(dir.join("overlay.png")),
        model: Some(dir.join("model.json")),
        issues: Some(dir.join("issues.json")),
        config: None,
        corrections: None,
        scale: scale.map(str::to_string),
        debug_masks: None,
    }
}

/// Set-definition erosion and dilation, outside pixels background.
fn brute_erode(img: &BinaryImage, se: &[(i32, i32)]) -> BinaryImage {
    BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        se.iter().all(|&(dx, dy)| img.get_or(x as i64 + dx as i64, y as i64 + dy as i64, false))
    })
}

fn brute_dilate(img: &BinaryImage, se: &[(i32, i32)]) -> BinaryImage {
    BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        se.iter().any(|&(dx, dy)| img.get_or(x as i64 - dx as i64, y as i64 - dy as i64, false))
    })
}

fn random_pair(rng: &mut ChaCha8Rng) -> (BinaryImage, Vec<(i32, i32)>) {
    let density = rng.gen_range(0.05..0.95);
    let img = BinaryImage::from_fn(16, 16, |_, _| rng.gen_bool(density));
    let reach = rng.gen_range(0..=4);
    let mut se = BTreeSet::from([(0, 0)]);
    for _ in 0..rng.gen_range(0..12) {
        se.insert((rng.gen_range(-reach..=reach), rng.gen_range(-reach..=reach)));
    }
    (img, se.into_iter().collect())
}

fn morphology_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut bad = Vec::new();
    for k in 0..1000 {
        let (img, offsets) = random_pair(&mut rng);
        let se = StructuringElement::new(offsets.clone()).map_err(|e| e.to_string())?;
        if erode(&img, &se) != brute_erode(&img, &offsets) {
            bad.push(format!("erode #{k}"));
        }
        if dilate(&img, &se) != brute_dilate(&img, &offsets) {
            bad.push(format!("dilate #{k}"));
        }
        let dual = dilate_with_border(&img.complement(), &se.reflect(), true);
        if erode(&img, &se).complement() != dual {
            bad.push(format!("duality #{k}"));
        }
    }
    let t = start.elapsed();
    if !bad.is_empty() {
        return Err(format!("{} mismatches, first {}", bad.len(), bad[0]));
    }
    if t >= Duration::from_secs(10) {
        return Err(format!("took {t:?}"));
    }
    Ok(format!("1000 pairs pixel-exact, duality exact, {t:.2?}"))
}

/// Detected joint id to truth node id, nearest within `tol` pixels.
fn match_nodes(
    truth: &TrussModel,
    found: &[(usize, Point)],
    tol: f64,
) -> Result<(BTreeMap<usize, usize>, f64), String> {
    let mut map = BTreeMap::new();
    let mut worst: f64 = 0.0;
    for &(id, p) in found {
        let (best, d) = truth
            .nodes
            .iter()
            .map(|n| (n.id, n.pos_px.distance(p)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or("truth has no nodes")?;
        if d > tol {
            return Err(format!("joint {id} is {d:.1} px from any truth node"));
        }
        worst = worst.max(d);
        map.insert(id, best);
    }
    let targets: BTreeSet<usize> = map.values().copied().collect();
    if targets.len() != map.len() || map.len() != truth.nodes.len() {
        return Err(format!("{} joints for {} truth nodes", found.len(), truth.nodes.len()));
    }
    Ok((map, worst))
}

fn hazard_segmentation() -> Outcome {
    let params = SketchParams::default();
    let cfg = Config::default();
    let (mut tp, mut detected, mut expected) = (0usize, 0usize, 0usize);
    let mut support_errors = Vec::new();
    let mut checked_supports = 0;
    for seed in 0..5u64 {
        let (img, truth) = hazard_map(seed, &params).map_err(|e| e.to_string())?;
        let binary = binarize(&img, ThresholdPolicy::Auto).map_err(|e| e.to_string())?;
        let (structure, _) = remove_small_regions(&binary, cfg.small_region_min_area);
        let seg = segment(&structure, &cfg.segment_params()).map_err(|e| format!("seed {seed}: {e}"))?;
        let found: Vec<(usize, Point)> = seg.joints.iter().map(|j| (j.id, j.center)).collect();
        let (map, _) = match_nodes(&truth, &found, 3.0).map_err(|e| format!("seed {seed}: {e}"))?;
        if truth.members.len() < 5 || truth.loads.len() < 5 || truth.supports.len() < 3 {
            return Err(format!("seed {seed}: hazard map lacks symbols"));
        }

        expected += truth.loads.len();
        detected += seg.arrows.len() + seg.ambiguous_arrows.len();
        let mut open: Vec<bool> = vec![true; truth.loads.len()];
        for a in &seg.arrows {
            let node = map[&a.target_joint];
            let hit = truth.loads.iter().enumerate().position(|(k, l)| {
                open[k] && l.node == node && angle_diff_deg(l.direction_deg, a.orientation_deg, 360.0) <= 5.0
            });
            if let Some(k) = hit {
                open[k] = false;
                tp += 1;
            }
        }

        checked_supports += truth.supports.len();
        if seg.supports.supports.len() != truth.supports.len() || !seg.supports.orphans.is_empty() {
            support_errors.push(format!(
                "seed {seed}: {} supports, {} orphans",
                seg.supports.supports.len(),
                seg.supports.orphans.len()
            ));
        }
        for s in &truth.supports {
            let Some(d) = seg.supports.supports.iter().find(|d| map[&d.apex_joint] == s.node) else {
                support_errors.push(format!("seed {seed}: node {} support missed", s.node));
                continue;
            };
            let angle_ok = match (s.kind, s.roll_angle_deg, d.roll_angle_deg) {
                (SupportKind::Pinned, _, None) => true,
                (SupportKind::Roller, Some(a), Some(b)) => angle_diff_deg(a, b, 180.0) <= 3.0,
                _ => false,
            };
            if d.kind != s.kind || !angle_ok {
                support_errors.push(format!("seed {seed}: node {} read {:?} {:?}", s.node, d.kind, d.roll_angle_deg));
            }
        }
    }
    let precision = tp as f64 / detected.max(1) as f64;
    let recall = tp as f64 / expected.max(1) as f64;
    if precision < 1.0 || recall < 1.0 || !support_errors.is_empty() {
        return Err(format!("arrow precision {precision:.3} recall {recall:.3}; supports {support_errors:?}"));
    }
    Ok(format!(
        "5 maps: {expected} arrows, precision 1.000 recall 1.000; {checked_supports}/{checked_supports} supports correct"
    ))
}

/// Exact topology comparison with node relabeling by position. Returns the
/// largest joint displacement in pixels.
fn compare_topology(truth: &TrussModel, got: &TrussModel) -> Result<f64, String> {
    let found: Vec<(usize, Point)> = got.nodes.iter().map(|n| (n.id, n.pos_px)).collect();
    let (map, worst) = match_nodes(truth, &found, 3.0)?;
    let pairs = |m: &TrussModel, f: &dyn Fn(usize) -> usize| -> BTreeSet<(usize, usize)> {
        m.members.iter().map(|e| (f(e.node_a).min(f(e.node_b)), f(e.node_a).max(f(e.node_b)))).collect()
    };
    if pairs(truth, &|i| i) != pairs(got, &|i| map[&i]) || truth.members.len() != got.members.len() {
        return Err("member adjacency differs".into());
    }
    let supports = |m: &TrussModel, f: &dyn Fn(usize) -> usize| -> BTreeSet<(usize, bool)> {
        m.supports.iter().map(|s| (f(s.node), s.kind == SupportKind::Roller)).collect()
    };
    if supports(truth, &|i| i) != supports(got, &|i| map[&i]) || truth.supports.len() != got.supports.len() {
        return Err("support kinds differ".into());
    }
    if truth.loads.len() != got.loads.len() {
        return Err(format!("{} loads for {}", got.loads.len(), truth.loads.len()));
    }
    let mut open: Vec<bool> = vec![true; truth.loads.len()];
    for l in &got.loads {
        let node = map[&l.node];
        let hit = truth.loads.iter().enumerate().position(|(k, t)| {
            open[k]
                && t.node == node
                && matches!((t.magnitude_kn, l.magnitude_kn), (Some(a), Some(b)) if (a - b).abs() <= 1e-9 * a.abs())
        });
        match hit {
            Some(k) => open[k] = false,
            None => return Err(format!("load at node {node} ({:?} kN) unmatched", l.magnitude_kn)),
        }
    }
    Ok(worst)
}

fn truss_corpus(n: u64) -> Result<Vec<TrussModel>, String> {
    let params = SketchParams::default();
    (0..n)
        .map(|seed| random_truss(seed, 3 + (seed as usize % 10), &params).map_err(|e| format!("seed {seed}: {e}")))
        .collect()
}

fn round_trip(corpus: &[TrussModel]) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let params = SketchParams::default();
    let start = Instant::now();
    let mut passed = 0;
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (seed, truth) in corpus.iter().enumerate() {
        let img = generate_sketch(truth, &params, seed as u64).map_err(|e| e.to_string())?;
        let path = dir.path().join(format!("t{seed}.png"));
        save_gray_png(&img, &path).map_err(|e| e.to_string())?;
        let args = analyze_args(&path, dir.path(), Some("1,2=4.0"));
        cmd_analyze(&args);
        let text = std::fs::read_to_string(dir.path().join("model.json")).map_err(|e| e.to_string())?;
        let (got, _) = from_json(&text).map_err(|e| e.to_string())?;
        match compare_topology(truth, &got) {
            Ok(d) => {
                passed += 1;
                worst = worst.max(d);
            }
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }
    let t = start.elapsed();
    let rate = passed as f64 / corpus.len() as f64;
    let line =
        format!("{passed}/{} exact ({:.0}%), max joint error {worst:.2} px, {t:.1?}", corpus.len(), rate * 100.0);
    if rate < 0.95 || worst > 3.0 || t >= Duration::from_secs(60) {
        return Err(format!("{line}; {failures:?}"));
    }
    Ok(line)
}

const OCR_STRINGS: [&str; 30] = [
    "10kN", "2.5kN", "250N", "-7.5kN", "12.5kN", "40kN", "0.25kN", "500N", "15kN", "3.75kN", "ABC", "XYZ", "W12X",
    "B7R4", "Q3P", "TRUSS", "F16", "M8N", "GJ5", "E2D4", "V6T", "L0C", "9UY", "R2K7", "J7K", "PLK", "S5A", "CD34",
    "2048", "H4X",
];

fn oriented_ocr() -> Outcome {
    let templates = TemplateSet::builtin();
    let slopes = [0.0, 15.0, -15.0, 30.0, -30.0, 60.0, -60.0];
    let (mut total, mut correct) = (0, 0);
    let (mut uniform_chars, mut excluded) = (0, 0);
    let mut misses = Vec::new();
    for text in OCR_STRINGS {
        let uniform = text.chars().all(|c| c.is_ascii_digit() || c.is_ascii_uppercase());
        for s in slopes {
            for deg in [s, s + 180.0] {
                let mut canvas = BinaryImage::new(220, 220);
                for (x, y) in text_pixels(&templates, text, Point::new(110.0, 110.0), deg, 2, 18, &|_| None) {
                    canvas.set_clipped(x, y, true);
                }
                let mut words = group_words(&canvas, 8.0);
                total += 1;
                if words.len() != 1 {
                    misses.push(format!("{text}@{deg}: {} words", words.len()));
                    continue;
                }
                if uniform {
                    uniform_chars += words[0].char_regions.len();
                    excluded += words[0].char_regions.len() - slope_candidates(&words[0], (0.5, 1.4)).len();
                }
                match read_word(&mut words[0], &templates, (0.5, 1.4)) {
                    Ok(r) if r.text == text => correct += 1,
                    Ok(r) => misses.push(format!("{text}@{deg}: {:?}", r.text)),
                    Err(e) => misses.push(format!("{text}@{deg}: {e}")),
                }
            }
        }
    }
    let acc = correct as f64 / total as f64;
    let line = format!(
        "{correct}/{total} strings ({:.1}%), {excluded}/{uniform_chars} uniform characters excluded",
        acc * 100.0
    );
    if acc < 0.98 || excluded > 0 {
        return Err(format!("{line}; {misses:?}"));
    }
    Ok(line)
}

fn solver_correctness(corpus: &[TrussModel]) -> Outcome {
    let frame = solve(&a_frame(10.0)).map_err(|e| e.to_string())?;
    let diag = -10.0 / 2f64.sqrt();
    if (frame.axial_kn[&1] - 5.0).abs() > 1e-9
        || (frame.axial_kn[&2] - diag).abs() > 1e-9
        || (frame.axial_kn[&3] - diag).abs() > 1e-9
    {
        return Err(format!("A-frame forces {:?}", frame.axial_kn));
    }
    // Each truss again with its roller tilted, which exercises the rotated frame.
    let mut cases: Vec<(usize, TrussModel)> = Vec::new();
    for (seed, model) in corpus.iter().enumerate() {
        for angle in [0.0, 25.0, 140.0] {
            let mut m = model.clone();
            for s in m.supports.iter_mut().filter(|s| s.kind == SupportKind::Roller) {
                s.roll_angle_deg = Some(angle);
            }
            cases.push((seed, m));
        }
    }
    let mut worst_rel: f64 = 0.0;
    for (seed, model) in &cases {
        let got = solve(model).map_err(|e| format!("seed {seed}: {e}"))?;
        let (oracle, oracle_reactions) = method_of_joints(model).ok_or(format!("seed {seed}: oracle stalled"))?;
        let max_load = model.loads.iter().filter_map(|l| l.magnitude_kn).fold(0.0, f64::max);
        let total_load: f64 = model.loads.iter().filter_map(|l| l.magnitude_kn).sum();
        let rel = max_abs_diff(&got.axial_kn, &oracle) / max_abs(&oracle).max(max_load);
        worst_rel = worst_rel.max(rel);
        if rel > 1e-9 {
            return Err(format!("seed {seed}: relative force error {rel:e}"));
        }
        for (node, r) in &oracle_reactions {
            let g = got.reactions.get(node).copied().unwrap_or([f64::NAN; 2]);
            if !((g[0] - r[0]).abs() <= 1e-9 * max_load && (g[1] - r[1]).abs() <= 1e-9 * max_load) {
                return Err(format!("seed {seed}: reaction at {node} {g:?} vs {r:?}"));
            }
        }
        let residual = equilibrium_residual(model, &got);
        if residual > 1e-9 * max_load {
            return Err(format!("seed {seed}: joint residual {residual:e}"));
        }
        let (mut fx, mut fy, mut mz) = (0.0, 0.0, 0.0);
        let mut add = |node: usize, v: [f64; 2]| {
            let p = model.node(node).and_then(|n| n.pos_m).expect("calibrated");
            fx += v[0];
            fy += v[1];
            mz += p.x * v[1] - p.y * v[0];
        };
        for l in &model.loads {
            let d = l.direction_deg.to_radians();
            let m = l.magnitude_kn.unwrap_or(0.0);
            add(l.node, [m * d.cos(), m * d.sin()]);
        }
        for (&node, &r) in &got.reactions {
            add(node, r);
        }
        let bound = 1e-9 * total_load;
        if fx.abs() > bound || fy.abs() > bound || mz.abs() > bound {
            return Err(format!("seed {seed}: global balance ({fx:e}, {fy:e}, {mz:e})"));
        }
    }
    Ok(format!(
        "A-frame {:.4}/{:.4} kN; {} truss/roller cases match the joint oracle, worst relative {worst_rel:.1e}",
        frame.axial_kn[&2],
        frame.axial_kn[&1],
        cases.len()
    ))
}

fn invariance(corpus: &[TrussModel]) -> Outcome {
    let mut worst: f64 = 0.0;
    for (seed, model) in corpus.iter().enumerate() {
        let base = solve(model).map_err(|e| e.to_string())?;
        let loads = model.loads.iter().filter_map(|l| l.magnitude_kn).fold(0.0, f64::max);
        let scale = max_abs(&base.axial_kn).max(loads);
        for k in [1e-3, 0.37, 7.5, 2.1e5] {
            let mut stiff = model.clone();
            stiff.members.iter_mut().for_each(|m| m.ea *= k);
            let mut big = model.clone();
            big.nodes.iter_mut().for_each(|n| n.pos_m = n.pos_m.map(|p| p * k));
            for variant in [stiff, big] {
                let r = solve(&variant).map_err(|e| e.to_string())?;
                let rel = max_abs_diff(&base.axial_kn, &r.axial_kn) / scale;
                worst = worst.max(rel);
                if rel > 1e-12 {
                    return Err(format!("seed {seed}, factor {k}: relative change {rel:e}"));
                }
            }
        }
    }
    Ok(format!("{} trusses x 4 factors, worst relative change {worst:.1e}", corpus.len()))
}

fn determinism(corpus: &[TrussModel]) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cases = 0;
    for (seed, truth) in corpus.iter().enumerate().take(5) {
        let img = generate_sketch(truth, &SketchParams::default(), seed as u64).map_err(|e| e.to_string())?;
        let path = dir.path().join("in.png");
        save_gray_png(&img, &path).map_err(|e| e.to_string())?;
        for scale in [Some("1,2=4.0"), None] {
            let runs: Vec<Vec<Vec<u8>>> = ["a", "b"]
                .iter()
                .map(|sub| {
                    let out = dir.path().join(sub);
                    std::fs::create_dir_all(&out).expect("temp dir");
                    cmd_analyze(&analyze_args(&path, &out, scale));
                    ["overlay.png", "model.json", "issues.json"]
                        .iter()
                        .map(|f| std::fs::read(out.join(f)).expect("output written"))
                        .collect()
                })
                .collect();
            if runs[0] != runs[1] {
                return Err(format!("seed {seed}, scale {scale:?}: outputs differ"));
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} repeated runs byte-identical (overlay, model, issues)"))
}

fn latency() -> Outcome {
    let params = SketchParams { width: 2000, height: 1500, ..SketchParams::default() };
    let truth = random_truss(11, 12, &params).map_err(|e| e.to_string())?;
    let img = generate_sketch(&truth, &params, 11).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("big.png");
    save_gray_png(&img, &path).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let code = cmd_analyze(&analyze_args(&path, dir.path(), Some("1,2=4.0")));
    let t = start.elapsed();
    if code != 0 {
        return Err(format!("exit code {code}"));
    }
    if t >= Duration::from_secs(5) {
        return Err(format!("took {t:.2?}"));
    }
    Ok(format!("2000x1500 analyzed in {t:.2?}"))
}

#[test]
fn acceptance() {
    let corpus = truss_corpus(60);
    let results: Vec<(&str, Outcome)> = match corpus {
        Ok(corpus) => vec![
            ("1 morphology oracle", morphology_oracle()),
            ("2 hazard-map segmentation", hazard_segmentation()),
            ("3 round-trip parsing", round_trip(&corpus)),
            ("4 oriented OCR", oriented_ocr()),
            ("5 solver correctness", solver_correctness(&corpus)),
            ("6 EA and scale invariance", invariance(&corpus)),
            ("7 determinism", determinism(&corpus)),
            ("8 end-to-end latency", latency()),
        ],
        Err(e) => vec![("corpus generation", Err(e))],
    };
    let mut err = std::io::stderr();
    let mut failed = 0;
    for (name, outcome) in &results {
        let _ = match outcome {
            Ok(detail) => writeln!(err, "PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                writeln!(err, "FAIL  {name}: {detail}")
            }
        };
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
