use super::RasterError;

/// 8-bit single channel image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, fill: u8) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::EmptyImage);
        }
        Ok(Self { width, height, data: vec![fill; width * height] })
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::EmptyImage);
        }
        if data.len() != width * height {
            return Err(RasterError::DimensionMismatch { width, height, len: data.len() });
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    /// Paint every foreground pixel of `mask` with `value`.
    pub fn paint(&mut self, mask: &BinaryImage, value: u8) {
        debug_assert_eq!((mask.width(), mask.height()), (self.width, self.height));
        for (d, &m) in self.data.iter_mut().zip(mask.data()) {
            if m {
                *d = value;
            }
        }
    }
}

/// Boolean pixel grid; `true` is foreground ink.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl std::fmt::Debug for BinaryImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BinaryImage {}x{}", self.width, self.height)?;
        if self.width * self.height <= 4096 {
            for y in 0..self.height {
                let row: String = (0..self.width).map(|x| if self.get(x, y) { '#' } else { '.' }).collect();
                writeln!(f, "{row}")?;
            }
        }
        Ok(())
    }
}

impl BinaryImage {
    /// Blank (all background) image. Zero-sized images are allowed here so
    /// that empty canvases can be expressed.
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![false; width * height] }
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<bool>) -> Result<Self, RasterError> {
        if data.len() != width * height {
            return Err(RasterError::DimensionMismatch { width, height, len: data.len() });
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    /// Parse an ASCII picture: `#` (or `1`) is foreground, anything else background.
    pub fn from_ascii(rows: &[&str]) -> Self {
        let height = rows.len();
        let width = rows.iter().map(|r| r.chars().count()).max().unwrap_or(0);
        let mut img = Self::new(width, height);
        for (y, row) in rows.iter().enumerate() {
            for (x, c) in row.chars().enumerate() {
                img.set(x, y, c == '#' || c == '1');
            }
        }
        img
    }

    pub fn from_pixels(width: usize, height: usize, pixels: &[(usize, usize)]) -> Self {
        let mut img = Self::new(width, height);
        for &(x, y) in pixels {
            img.set(x, y, true);
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Signed lookup; out-of-bounds reads return `outside`.
    pub fn get_or(&self, x: i64, y: i64, outside: bool) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            outside
        } else {
            self.data[y as usize * self.width + x as usize]
        }
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    /// Signed write; out-of-bounds writes are dropped.
    pub fn set_clipped(&mut self, x: i64, y: i64, v: bool) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.data[y as usize * self.width + x as usize] = v;
        }
    }

    pub fn count_foreground(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_blank(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.data.iter().enumerate().filter(|(_, &b)| b).map(move |(i, _)| (i % w, i / w))
    }

    pub fn complement(&self) -> BinaryImage {
        Self { width: self.width, height: self.height, data: self.data.iter().map(|b| !b).collect() }
    }

    fn zip_with(&self, other: &BinaryImage, f: impl Fn(bool, bool) -> bool) -> BinaryImage {
        assert_eq!((self.width, self.height), (other.width, other.height), "size mismatch");
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn union(&self, other: &BinaryImage) -> BinaryImage {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &BinaryImage) -> BinaryImage {
        self.zip_with(other, |a, b| a && b)
    }

    /// Pixels of `self` that are not in `other`.
    pub fn difference(&self, other: &BinaryImage) -> BinaryImage {
        self.zip_with(other, |a, b| a && !b)
    }

    /// True when every foreground pixel of `self` is foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryImage) -> bool {
        self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }

    pub fn clear_pixels(&mut self, pixels: &[(usize, usize)]) {
        for &(x, y) in pixels {
            self.set(x, y, false);
        }
    }

    /// Gray rendering: foreground black (0) on white (255).
    pub fn to_gray(&self) -> GrayImage {
        let data = self.data.iter().map(|&b| if b { 0 } else { 255 }).collect();
        GrayImage::from_raw(self.width.max(1), self.height.max(1), data)
            .unwrap_or_else(|_| GrayImage::new(1, 1, 255).expect("1x1"))
    }
}

/// 8-bit RGB image, row-major, used for overlays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn from_gray(img: &GrayImage) -> Self {
        Self { width: img.width(), height: img.height(), data: img.data().iter().map(|&v| [v, v, v]).collect() }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, c: [u8; 3]) {
        self.data[y * self.width + x] = c;
    }

    pub fn set_clipped(&mut self, x: i64, y: i64, c: [u8; 3]) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.data[y as usize * self.width + x as usize] = c;
        }
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.data
    }

    /// Luma conversion with the same weights used when loading color files.
    pub fn to_gray(&self) -> GrayImage {
        let data = self.data.iter().map(|&[r, g, b]| luma(r, g, b)).collect();
        GrayImage::from_raw(self.width, self.height, data).expect("non-empty")
    }
}

/// 0.299 R + 0.587 G + 0.114 B, rounded.
pub(crate) fn luma(r: u8, g: u8, b: u8) -> u8 {
    (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64).round().clamp(0.0, 255.0) as u8
}
