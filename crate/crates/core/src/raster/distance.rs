use super::BinaryImage;

/// Euclidean distance from every foreground pixel centre to the nearest
/// background pixel centre (0 on background). Pixels outside the image are
/// background. Exact, via the lower-envelope transform of Felzenszwalb and
/// Huttenlocher applied along columns then rows.
pub fn distance_transform(img: &BinaryImage) -> Vec<f64> {
    // Pad by one background pixel so the border counts as background.
    let (w, h) = (img.width() + 2, img.height() + 2);
    let inf = 1e20;
    let mut grid = vec![0.0f64; w * h];
    for y in 0..img.height() {
        for x in 0..img.width() {
            if img.get(x, y) {
                grid[(y + 1) * w + x + 1] = inf;
            }
        }
    }
    let mut col = vec![0.0; h];
    let mut out = vec![0.0; h.max(w)];
    for x in 0..w {
        for y in 0..h {
            col[y] = grid[y * w + x];
        }
        edt_1d(&col, &mut out[..h]);
        for y in 0..h {
            grid[y * w + x] = out[y];
        }
    }
    let mut row = vec![0.0; w];
    for y in 0..h {
        row.copy_from_slice(&grid[y * w..(y + 1) * w]);
        edt_1d(&row, &mut out[..w]);
        grid[y * w..(y + 1) * w].copy_from_slice(&out[..w]);
    }
    let mut dist = vec![0.0; img.width() * img.height()];
    for y in 0..img.height() {
        for x in 0..img.width() {
            dist[y * img.width() + x] = grid[(y + 1) * w + x + 1].sqrt();
        }
    }
    dist
}

/// Squared 1-D distance transform of a sampled function.
fn edt_1d(f: &[f64], d: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let mut s;
        loop {
            let p = v[k];
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, out) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        *out = dq * dq + f[p];
    }
}

/// Typical stroke width: twice the median distance-transform value over
/// ridge pixels (foreground pixels whose distance is a local maximum in the
/// 8-neighbourhood). `None` for blank images.
pub fn stroke_thickness(img: &BinaryImage) -> Option<f64> {
    let dist = distance_transform(img);
    let (w, h) = (img.width() as i64, img.height() as i64);
    let at = |x: i64, y: i64| -> f64 {
        if x < 0 || y < 0 || x >= w || y >= h {
            0.0
        } else {
            dist[(y * w + x) as usize]
        }
    };
    let mut ridge: Vec<f64> = Vec::new();
    for (x, y) in img.foreground() {
        let (x, y) = (x as i64, y as i64);
        let d = at(x, y);
        let is_max = (-1..=1).flat_map(|dy| (-1..=1).map(move |dx| (dx, dy))).all(|(dx, dy)| at(x + dx, y + dy) <= d);
        if is_max {
            ridge.push(d);
        }
    }
    if ridge.is_empty() {
        return None;
    }
    ridge.sort_by(|a, b| a.total_cmp(b));
    let n = ridge.len();
    let median = if n % 2 == 1 { ridge[n / 2] } else { 0.5 * (ridge[n / 2 - 1] + ridge[n / 2]) };
    Some(2.0 * median)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(img: &BinaryImage) -> Vec<f64> {
        let (w, h) = (img.width() as i64, img.height() as i64);
        let mut out = vec![0.0; (w * h) as usize];
        for (x, y) in img.foreground() {
            let mut best = f64::INFINITY;
            for by in -1..=h {
                for bx in -1..=w {
                    if !img.get_or(bx, by, false) {
                        let d = ((bx - x as i64) as f64).hypot((by - y as i64) as f64);
                        best = best.min(d);
                    }
                }
            }
            out[y * w as usize + x] = best;
        }
        out
    }

    #[test]
    fn matches_brute_force_on_random_images() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let img = BinaryImage::from_fn(13, 9, |_, _| rng.gen_bool(0.7));
            let fast = distance_transform(&img);
            let slow = brute_force(&img);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn horizontal_stroke_thickness() {
        let img = BinaryImage::from_fn(60, 20, |x, y| (5..55).contains(&x) && (8..11).contains(&y));
        // Centre row sits 2 px from the nearest paper pixel.
        assert_eq!(stroke_thickness(&img), Some(4.0));
        assert_eq!(stroke_thickness(&BinaryImage::new(5, 5)), None);
    }
}
