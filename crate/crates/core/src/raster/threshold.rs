use super::{BinaryImage, GrayImage, RasterError};

/// How the ink/paper split is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdPolicy {
    /// Global histogram threshold minimizing intra-class variance, with the
    /// minority class taken as foreground.
    #[default]
    Auto,
    /// Pixels strictly darker than `t` are foreground.
    Fixed(u8),
}

/// Threshold `t` minimizing the weighted intra-class variance of the split
/// `{v <= t}` / `{v > t}`. Ties resolve to the lowest `t`. Returns `None`
/// for single-intensity images.
pub fn otsu_threshold(img: &GrayImage) -> Option<u8> {
    let mut hist = [0u64; 256];
    for &v in img.data() {
        hist[v as usize] += 1;
    }
    let total = img.data().len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(v, &c)| v as f64 * c as f64).sum();

    // Minimizing intra-class variance is equivalent to maximizing the
    // between-class variance w0 w1 (mu0 - mu1)^2.
    let mut best: Option<(u8, f64)> = None;
    let (mut w0, mut sum0) = (0.0f64, 0.0f64);
    for t in 0..255usize {
        w0 += hist[t] as f64;
        sum0 += t as f64 * hist[t] as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let mu0 = sum0 / w0;
        let mu1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        match best {
            Some((_, b)) if between <= b * (1.0 + 1e-12) => {}
            _ => best = Some((t as u8, between)),
        }
    }
    best.map(|(t, _)| t)
}

/// Split a gray image into ink (foreground) and paper.
pub fn binarize(img: &GrayImage, policy: ThresholdPolicy) -> Result<BinaryImage, RasterError> {
    let first = img.data()[0];
    if img.data().iter().all(|&v| v == first) {
        return Err(RasterError::NoSeparableForeground);
    }
    let (w, h) = (img.width(), img.height());
    let out = match policy {
        ThresholdPolicy::Fixed(t) => {
            let data: Vec<bool> = img.data().iter().map(|&v| v < t).collect();
            BinaryImage::from_raw(w, h, data)?
        }
        ThresholdPolicy::Auto => {
            let t = otsu_threshold(img).ok_or(RasterError::NoSeparableForeground)?;
            let dark = img.data().iter().filter(|&&v| v <= t).count();
            // Ink is the darker class unless it is the majority.
            let dark_is_ink = 2 * dark <= img.data().len();
            let data: Vec<bool> = img.data().iter().map(|&v| (v <= t) == dark_is_ink).collect();
            BinaryImage::from_raw(w, h, data)?
        }
    };
    let n = out.count_foreground();
    if n == 0 || n == w * h {
        return Err(RasterError::NoSeparableForeground);
    }
    Ok(out)
}
