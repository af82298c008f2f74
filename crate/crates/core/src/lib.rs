//! Parse raster sketches of planar pin-jointed trusses, solve them with the
//! direct stiffness method and overlay member axial forces on the input.

pub mod annotator;
pub mod config;
pub mod geometry;
pub mod pipeline;
pub mod raster;
pub mod segmenter;
pub mod solver;
pub mod textreader;
pub mod trussmodel;
