use std::path::Path;

use ::image::{DynamicImage, ImageBuffer, Luma, Rgb};

use super::image::luma;
use super::{BinaryImage, GrayImage, RasterError, RgbImage};

/// Load any supported raster (PNG, BMP) as 8-bit gray. Color inputs are
/// reduced with 0.299 R + 0.587 G + 0.114 B.
pub fn load_gray(path: &Path) -> Result<GrayImage, RasterError> {
    let img = ::image::open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        other => other.to_rgb8().pixels().map(|p| luma(p[0], p[1], p[2])).collect(),
    };
    GrayImage::from_raw(w, h, data)
}

pub fn save_gray_png(img: &GrayImage, path: &Path) -> Result<(), RasterError> {
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_raw(img.width() as u32, img.height() as u32, img.data().to_vec())
            .expect("buffer size matches");
    buf.save_with_format(path, ::image::ImageFormat::Png)?;
    Ok(())
}

pub fn save_binary_png(img: &BinaryImage, path: &Path) -> Result<(), RasterError> {
    save_gray_png(&img.to_gray(), path)
}

pub fn save_rgb_png(img: &RgbImage, path: &Path) -> Result<(), RasterError> {
    let raw: Vec<u8> = img.pixels().iter().flatten().copied().collect();
    let buf: ImageBuffer<Rgb<u8>, Vec<u8>> =
        ImageBuffer::from_raw(img.width() as u32, img.height() as u32, raw).expect("buffer size matches");
    buf.save_with_format(path, ::image::ImageFormat::Png)?;
    Ok(())
}
