//! Raster substrate: gray and binary images, global thresholding, binary
//! morphology, connected-component labeling and per-region shape metrics.

mod components;
mod distance;
mod image;
mod io;
mod morphology;
mod threshold;

pub use self::components::{
    connected_components, label_image, region_metrics, remove_small_regions, Connectivity, Region, RegionMetrics,
};
pub use self::distance::{distance_transform, stroke_thickness};
pub use self::image::{BinaryImage, GrayImage, RgbImage};
pub use self::io::{load_gray, save_binary_png, save_gray_png, save_rgb_png};
pub use self::morphology::{dilate, dilate_with_border, erode, erode_with_border, fill_holes, StructuringElement};
pub use self::threshold::{binarize, otsu_threshold, ThresholdPolicy};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("image dimensions {width}x{height} do not match {len} samples")]
    DimensionMismatch { width: usize, height: usize, len: usize },
    #[error("image must be at least 1x1")]
    EmptyImage,
    #[error("no separable foreground")]
    NoSeparableForeground,
    #[error("structuring element must be non-empty, contain the origin and have unique offsets")]
    InvalidStructuringElement,
    #[error("region metrics need a non-empty pixel set")]
    EmptyRegion,
    #[error("image i/o: {0}")]
    Io(#[from] ::image::ImageError),
}
