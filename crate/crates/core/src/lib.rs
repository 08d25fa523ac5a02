//! Deterministic toolkit for face-morphing attack research: morph generation,
//! print-and-scan simulation, spectral comparison, dataset construction,
//! external classifiers and ISO-style detection metrics.

pub mod classifier;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod io;
pub mod label;
pub mod morph;
pub mod pns;
pub mod raster;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use label::Label;
pub use raster::{FloatRaster, LandmarkSet, Point2, Raster};
