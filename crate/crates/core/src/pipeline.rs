//! The analysis pipeline from a grayscale sketch to a solved model.

use thiserror::Error;

use crate::config::Config;
use crate::raster::{binarize, remove_small_regions, BinaryImage, GrayImage, RasterError, ThresholdPolicy};
use crate::segmenter::{segment, SegmentError, Segmentation};
use crate::solver::{solve, SolveError, SolveResult};
use crate::textreader::{group_words, read_word, snap_labels, Attachment, LabelValue, RecognizedLabel, TemplateSet};
use crate::trussmodel::{
    apply_corrections, build_model, calibrate_scale, validate, CorrectionError, Corrections, ModelError, TrussModel,
    ValidationIssue,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Correction(#[from] CorrectionError),
    #[error("scale reference: {0}")]
    Scale(#[from] ModelError),
    #[error(transparent)]
    Raster(RasterError),
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeOptions {
    pub config: Config,
    pub corrections: Option<Corrections>,
    /// Reference pair and its distance in metres.
    pub scale: Option<(usize, usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub model: TrussModel,
    pub labels: Vec<RecognizedLabel>,
    pub issues: Vec<ValidationIssue>,
    /// Present when validation passed and the solve succeeded.
    pub result: Option<SolveResult>,
    /// Intermediate masks by stage name, in pipeline order.
    pub masks: Vec<(String, BinaryImage)>,
}

impl Analysis {
    pub fn has_errors(&self) -> bool {
        self.issues.iter().any(ValidationIssue::is_error)
    }
}

/// Binarize, split text from structure, segment, read and attach labels,
/// build the model, apply corrections and scale, validate and solve. Errors
/// are reserved for bad corrections or scale input; problems with the
/// sketch itself come back as issues.
pub fn analyze(gray: &GrayImage, options: &AnalyzeOptions) -> Result<Analysis, PipelineError> {
    let cfg = &options.config;
    let mut issues = Vec::new();
    let mut masks = Vec::new();

    let (seg, labels) = match binarize(gray, ThresholdPolicy::Auto) {
        Ok(binary) => {
            let (structure, small) = remove_small_regions(&binary, cfg.small_region_min_area);
            let mut text = BinaryImage::new(binary.width(), binary.height());
            for r in &small {
                for &(x, y) in &r.pixels {
                    text.set(x, y, true);
                }
            }
            masks.push(("binary".to_string(), binary.clone()));
            masks.push(("structure".to_string(), structure.clone()));
            masks.push(("text".to_string(), text.clone()));
            match segment(&structure, &cfg.segment_params()) {
                Ok(seg) => {
                    let labels = read_labels(&text, &seg, cfg, &mut issues);
                    (Some(seg), labels)
                }
                Err(SegmentError::NoJoints) | Err(SegmentError::AmbiguousArrow) => (None, Vec::new()),
            }
        }
        Err(RasterError::NoSeparableForeground) => (None, Vec::new()),
        Err(e) => return Err(PipelineError::Raster(e)),
    };

    let mut model = match &seg {
        Some(seg) => {
            for (name, mask) in &seg.stages {
                if name != "input" {
                    masks.push((name.clone(), mask.clone()));
                }
            }
            for o in &seg.supports.orphans {
                let c = o.centroid();
                issues.push(ValidationIssue::warning(
                    "orphan support",
                    format!("region@{:.0},{:.0}", c.x, c.y),
                    "support symbol has no joint near its apex and was ignored",
                ));
            }
            for a in &seg.ambiguous_arrows {
                let c = a.centroid();
                issues.push(ValidationIssue::warning(
                    "ambiguous arrow",
                    format!("region@{:.0},{:.0}", c.x, c.y),
                    "arrow direction could not be decided and the arrow was ignored",
                ));
            }
            build_model(&seg.joints, &seg.members, &seg.supports.supports, &seg.arrows, &labels)
        }
        None => TrussModel::default(),
    };

    if let Some(c) = &options.corrections {
        model = apply_corrections(&model, c)?;
    }
    if let Some((i, j, d)) = options.scale {
        model = calibrate_scale(&model, i, j, d)?;
    }

    issues.extend(validate(&model));
    let mut result = None;
    if !issues.iter().any(ValidationIssue::is_error) {
        match solve(&model) {
            Ok(r) => result = Some(r),
            Err(e) => issues.push(solve_issue(&e)),
        }
    }
    Ok(Analysis { model, labels, issues, result, masks })
}

fn solve_issue(e: &SolveError) -> ValidationIssue {
    let code = match e {
        SolveError::UnstableGeometry => "unstable geometry",
        SolveError::Mechanism(_) => "mechanism",
        SolveError::ZeroLengthMember(_) => "zero-length member",
        _ => "solver error",
    };
    ValidationIssue::error(code, "model", e.to_string())
}

fn read_labels(
    text: &BinaryImage,
    seg: &Segmentation,
    cfg: &Config,
    issues: &mut Vec<ValidationIssue>,
) -> Vec<RecognizedLabel> {
    let templates = TemplateSet::builtin();
    let band = (cfg.ocr_area_band[0], cfg.ocr_area_band[1]);
    let mut words = group_words(text, cfg.word_dilation_radius);
    words.sort_by_key(|a| (a.group_bbox.min_y, a.group_bbox.min_x));
    for w in &mut words {
        if let Ok(reading) = read_word(w, &templates, band) {
            let min = reading.char_scores.iter().copied().fold(f64::INFINITY, f64::min);
            if reading.mean_score() < cfg.flip_thresholds[0] || min < cfg.flip_thresholds[1] {
                let c = w.center();
                issues.push(ValidationIssue::warning(
                    "low-confidence text",
                    format!("text@{:.0},{:.0}", c.x, c.y),
                    format!("read {:?} with mean score {:.2}", reading.text, reading.mean_score()),
                ));
            }
        }
    }
    let labels = snap_labels(&words, &seg.arrows, &seg.members, &seg.joints);
    for l in &labels {
        if let (Attachment::Arrow(id), LabelValue::Unparseable) = (l.attached_to, &l.parsed) {
            let k = seg.arrows.iter().position(|a| a.id == id).map_or(id, |p| p + 1);
            issues.push(ValidationIssue::warning(
                "unparseable load magnitude",
                format!("load:{k}"),
                format!("label {:?} is not a load magnitude", l.text),
            ));
        }
    }
    labels
}
